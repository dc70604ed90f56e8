"""Print the Fig. 2 / Fig. 3 discrepancies at Gamma and 2 Gamma (1/Gamma convergence check)."""

import argparse

import numpy as np

from zeno_lindblad.config import load_scenario
from zeno_lindblad.experiments import fig2_data, fig3_data


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--config", default="configs/fig2_squares.json")
    p.add_argument("--gamma", type=float, default=50.0)
    args = p.parse_args()
    cfg = load_scenario(args.config)
    disc = {}
    for g in (args.gamma, 2 * args.gamma):
        d2 = fig2_data(cfg.with_gamma(g))
        d3 = fig3_data(cfg.with_gamma(g))
        disc[g] = np.max(np.abs(d2["full"] - d2["markov"]), axis=0)
        spec = np.max(np.abs(d3["full"] - d3["effective"]))
        print(f"Gamma={g:g}: population discrepancy per eigenstate {np.array2string(disc[g], precision=4)}"
              f"  spectral discrepancy {spec:.4e}  (5/Gamma = {5 / g:.3g})")
    lo, hi = disc[args.gamma], disc[2 * args.gamma]
    print("ratio per eigenstate", np.array2string(lo / hi, precision=3), f" overall {lo.max() / hi.max():.3f}")


if __name__ == "__main__":
    main()
