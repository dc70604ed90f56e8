"""Command-line front end: ``zeno-lindblad {reduce,fig1,fig2,fig3,verify}``.

Exit codes: 0 success, 1 config/argument error, 2 numerical-contract violation,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments as ex
from .config import load_scenario, load_sweep
from .errors import ArgumentError, ContractError

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("zeno_lindblad")


def _write(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _scenario(args):
    cfg = load_scenario(args.config)
    return cfg if args.gamma is None else cfg.with_gamma(args.gamma)


def cmd_reduce(args) -> int:
    _write(ex.dump_json(ex.reduce_report(_scenario(args))), args.out)
    return EXIT_OK


def cmd_fig1(args) -> int:
    sweep = load_sweep(args.config)
    if args.gamma is not None:
        sweep = replace(sweep, gamma_values=(float(args.gamma),))
    result = ex.fig1_sweep(sweep, args.threads)
    _write(ex.fig1_csv(result), args.out)
    summary = ex.fig1_summary(result)
    if args.out not in (None, "-"):
        _write(json.dumps(summary, indent=1) + "\n", str(args.out) + ".slope.json")
    flag = "  ANOMALOUS (outside [%g, %g])" % ex.FIG1_SLOPE_RANGE if result["anomalous"] else ""
    print(f"log-log slope {result['slope']:.4f}{flag}", file=sys.stderr)
    return EXIT_OK


def cmd_fig2(args) -> int:
    _write(ex.fig2_csv(ex.fig2_data(_scenario(args))), args.out)
    return EXIT_OK


def cmd_fig3(args) -> int:
    _write(ex.fig3_csv(ex.fig3_data(_scenario(args))), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = ex.verify_report(_scenario(args), threads=args.threads)
    _write(json.dumps(report, indent=1) + "\n", args.out)
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


COMMANDS = {"reduce": cmd_reduce, "fig1": cmd_fig1, "fig2": cmd_fig2, "fig3": cmd_fig3, "verify": cmd_verify}


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zeno-lindblad", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "reduce": "effective-model report (JSON)",
        "fig1": "asymptotic NESS error vs Gamma (CSV); config is a sweep",
        "fig2": "h_D-eigenstate populations, full LME vs Markov chain (CSV)",
        "fig3": "spectra of tr_H0 rho and of R, full vs effective LME (CSV)",
        "verify": "superoperator identities, leakage and generator checks (JSON)",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default="-", help="output path, '-' for stdout")
        s.add_argument("--gamma", type=float, default=None, help="override dissipation strength")
        s.add_argument("--threads", type=_positive_int, default=1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.gamma is not None and not args.gamma > 0:
        print("error: --gamma must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ArgumentError as exc:
        print(f"config error ({args.config}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractError as exc:
        print(f"numerical contract violated ({args.config}): {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
