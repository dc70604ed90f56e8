"""Scenario construction and the figure / verification pipelines behind the CLI."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import ConfigError, ScenarioConfig, SweepConfig
from .dyson import brute_force_effective_superoperator, kernel_projectors, verify_dyson
from .errors import DegenerateSpectrumError
from .lindblad import LindbladModel, evolve, ness_full
from .markov import degenerate_pairs, evolve_populations, markov_rates, stationary_distribution, assemble_R_infinity
from .operators import Operator, frobenius_norm, hermitian_eig
from .zeno import (EffectiveModel, chain_full_model, compose_two_boundary, reduce_single_boundary,
                   xyz_chain_hamiltonian)

FIG1_SLOPE_RANGE = (-1.15, -0.85)
LEAKAGE_SLOPE_RANGE = (-1.2, -0.8)
LEAKAGE_GAMMAS = (50.0, 100.0, 200.0, 400.0)
LEAKAGE_WINDOW = (1.0, 5.0)
LEAKAGE_RECORD = 0.05


@dataclass(frozen=True, eq=False)
class Scenario:
    config: ScenarioConfig
    hamiltonian: Operator
    full: LindbladModel
    effective: EffectiveModel

    def initial_reduced(self) -> Operator:
        """R(0): diagonal in the h_D eigenbasis, uniform if not configured."""
        cfg = self.config
        d1 = self.effective.space.dim
        if cfg.initial_R_diagonal is None:
            return Operator(np.eye(d1, dtype=complex) / d1, self.effective.space)
        basis = hermitian_eig(self.effective.h_d)
        return basis.from_diagonal(cfg.initial_R_diagonal)


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    h = xyz_chain_hamiltonian(cfg.n_sites, *cfg.couplings)
    if cfg.right is None:
        eff = reduce_single_boundary(h, cfg.left, 0, cfg.gamma)
    else:
        eff = compose_two_boundary(h, cfg.left, cfg.right, cfg.gamma)
    full = chain_full_model(h, cfg.left, cfg.right, cfg.gamma)
    return Scenario(cfg, h, full, eff)


def parallel_map(fn: Callable, items: Iterable, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2 or np.any(y <= 0):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# --- reduce -----------------------------------------------------------------

def _cmatrix(a: np.ndarray) -> dict:
    a = np.asarray(a)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def parse_cmatrix(d: dict) -> np.ndarray:
    return np.array(d["re"], dtype=float) + 1j * np.array(d["im"], dtype=float)


def reduce_report(cfg: ScenarioConfig) -> dict:
    sc = build_scenario(cfg)
    eff = sc.effective
    values = hermitian_eig(eff.h_d).values
    return {
        "config": cfg.to_dict(),
        "h_D": _cmatrix(eff.h_d.data),
        "h_D_eigenvalues": values.tolist(),
        "h_D_degenerate_pairs": [list(p) for p in degenerate_pairs(values)],
        "H_a_norm": eff.h_a_norm,
        "g_labels": [list(lab) if isinstance(lab, tuple) else [lab] for lab in eff.labels],
        "A": _cmatrix(eff.a_matrix),
        "B": _cmatrix(eff.b_matrix),
        "jump_rates": [rate for _, rate in eff.canonical_jumps],
        "jumps": [_cmatrix(op.data) for op, _ in eff.canonical_jumps],
    }


def dump_json(report: dict) -> str:
    # repr-based float output round-trips exactly
    return json.dumps(report, indent=1, sort_keys=True) + "\n"


# --- fig1 -------------------------------------------------------------------

def asymptotic_error(cfg: ScenarioConfig) -> float:
    """``|psi0 (x) R_inf - rho_inf|_F`` at the configured Gamma."""
    sc = build_scenario(cfg)
    rho = ness_full(sc.full)
    mc = markov_rates(sc.effective)
    r_inf = assemble_R_infinity(stationary_distribution(mc), mc.basis)
    return frobenius_norm(sc.effective.embed(r_inf.op).data - rho.data)


def fig1_sweep(sweep: SweepConfig, threads: int = 1) -> dict:
    gammas = list(sweep.gamma_values)
    errors = parallel_map(lambda g: asymptotic_error(sweep.base.with_gamma(g)), gammas, threads)
    slope = loglog_slope(gammas, errors)
    lo, hi = FIG1_SLOPE_RANGE
    return {"gamma": gammas, "error": errors, "slope": slope,
            "anomalous": not (lo <= slope <= hi)}


# --- fig2 / fig3 ------------------------------------------------------------

def fig2_data(cfg: ScenarioConfig) -> dict:
    """h_D-eigenstate populations from the full LME and from the Markov chain."""
    if cfg.initial_R_diagonal is None:
        raise ConfigError("fig2 needs initial_R_diagonal")
    sc = build_scenario(cfg)
    mc = markov_rates(sc.effective)
    nu = stationary_distribution(mc)
    r0 = mc.basis.from_diagonal(cfg.initial_R_diagonal)
    traj = evolve(sc.full, sc.effective.embed(r0), cfg.t_end, cfg.dt_record)
    full = traj.populations(mc.basis, sc.effective.sites)
    times, markov = evolve_populations(mc, cfg.initial_R_diagonal, cfg.t_end, cfg.dt_record)
    return {"times": traj.times, "full": full, "markov": markov, "nu_infinity": nu.nu_infinity,
            "trace_corrections": traj.trace_corrections}


def fig3_data(cfg: ScenarioConfig) -> dict:
    """Sorted-descending spectra of tr_{H0} rho(tau) (full) and R(tau) (effective LME)."""
    sc = build_scenario(cfg)
    r0 = sc.initial_reduced()
    traj = evolve(sc.full, sc.effective.embed(r0), cfg.t_end, cfg.dt_record)
    eff_traj = evolve(sc.effective.to_lindblad(), r0, cfg.t_end, cfg.dt_record)
    try:
        mc = markov_rates(sc.effective)
        nu = np.sort(stationary_distribution(mc).nu_infinity)[::-1]
    except DegenerateSpectrumError:
        nu = None
    return {"times": traj.times, "full": traj.reduced_spectra(sc.effective.sites),
            "effective": eff_traj.reduced_spectra(), "nu_infinity": nu}


# --- verify -----------------------------------------------------------------

def leakage(model: LindbladModel, eff: EffectiveModel, r0: Operator,
            window=LEAKAGE_WINDOW, record_every=LEAKAGE_RECORD) -> float:
    """max over the window of ``|rho - psi0 (x) tr_{H0} rho|_F`` starting from ``psi0 (x) R0``."""
    traj = evolve(model, eff.embed(r0), window[1], record_every)
    worst = 0.0
    for t, s in zip(traj.times, traj.states):
        if t >= window[0] - 1e-9:
            worst = max(worst, frobenius_norm(s.data - eff.embed(eff.trace_out(s.op)).data))
    return worst


def leakage_sweep(cfg: ScenarioConfig, gammas=LEAKAGE_GAMMAS, threads: int = 1) -> dict:
    sc = build_scenario(cfg)
    r0 = sc.initial_reduced()
    values = parallel_map(lambda g: leakage(sc.full.with_gamma(g), sc.effective, r0), gammas, threads)
    return {"gamma": list(gammas), "leakage": values, "slope": loglog_slope(gammas, values)}


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def verify_report(cfg: ScenarioConfig, threads: int = 1,
                  dyson_gammas=(100.0, 400.0), identity_tol: float = 1e-10,
                  generator_tol: float = 1e-10, zero_tol: float = 1e-12) -> dict:
    sc = build_scenario(cfg)
    eff = sc.effective
    h_norm = frobenius_norm(sc.hamiltonian)
    checks = []

    rep = verify_dyson(sc.full.with_gamma(1.0), gammas=dyson_gammas, times=(1.0,))
    ident = max(rep.pseudo_inverse_residual, rep.projector_action_residual, rep.idempotence_residual)
    checks.append(_check("dyson_identities", ident <= identity_tol, residual=ident, threshold=identity_tol,
                         **{k: v for k, v in rep.as_dict().items() if k != "propagator_residuals"}))
    g_lo, g_hi = dyson_gammas
    r_lo, r_hi = rep.propagator_residuals[(g_lo, 1.0)], rep.propagator_residuals[(g_hi, 1.0)]
    need = (g_hi / g_lo) ** 1.5
    if r_lo <= zero_tol:
        ok, ratio = r_hi <= zero_tol, math.inf
    else:
        ratio = r_lo / max(r_hi, 1e-300)
        ok = ratio >= need
    checks.append(_check("dyson_propagator_scaling", ok, residuals={str(g_lo): r_lo, str(g_hi): r_hi},
                         ratio=ratio, min_ratio=need))

    proj = kernel_projectors(sc.full)
    brute = brute_force_effective_superoperator(sc.full, proj)
    constructed = eff.superoperator()
    gen_err = float(np.max(np.abs(brute - constructed)))
    checks.append(_check("generator_equivalence", gen_err <= generator_tol, max_abs_error=gen_err,
                         threshold=generator_tol))

    if h_norm <= zero_tol:
        checks.append(_check("leakage_slope", True, note="H = 0: no leakage"))
    else:
        lk = leakage_sweep(cfg, threads=threads)
        lo, hi = LEAKAGE_SLOPE_RANGE
        if max(lk["leakage"]) <= zero_tol:
            checks.append(_check("leakage_slope", True, note="leakage identically zero", **lk))
        else:
            checks.append(_check("leakage_slope", lo <= lk["slope"] <= hi, range=[lo, hi], **lk))

    values = hermitian_eig(eff.h_d).values
    span = float(values[-1] - values[0])
    if span <= zero_tol * max(1.0, h_norm):
        checks.append(_check("h_D_nondegenerate", True, note="h_D is a multiple of the identity; "
                             "Markov reduction trivial", eigenvalues=values.tolist()))
    else:
        pairs = degenerate_pairs(values)
        checks.append(_check("h_D_nondegenerate", not pairs, eigenvalues=values.tolist(),
                             degenerate_pairs=[list(p) for p in pairs]))

    checks.append(_check("H_a_norm", True, value=eff.h_a_norm, note="informational"))
    return {"config": cfg.to_dict(), "checks": checks, "passed": all(c["passed"] for c in checks)}


# --- CSV --------------------------------------------------------------------

def format_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def fig1_csv(result: dict) -> str:
    rows = [(g, e) for g, e in zip(result["gamma"], result["error"])]
    return format_csv(["gamma", "error_frobenius"], rows)


def fig1_summary(result: dict) -> dict:
    return {"gamma": result["gamma"], "error": result["error"], "slope": result["slope"],
            "slope_range": list(FIG1_SLOPE_RANGE), "anomalous": result["anomalous"]}


def fig2_csv(data: dict) -> str:
    n = data["full"].shape[1]
    header = ["tau"] + [f"full_{a}" for a in range(n)] + [f"markov_{a}" for a in range(n)]
    rows = [[t, *f, *m] for t, f, m in zip(data["times"], data["full"], data["markov"])]
    nu = data["nu_infinity"]
    rows.append([math.inf, *nu, *nu])
    return format_csv(header, rows)


def fig3_csv(data: dict) -> str:
    n = data["full"].shape[1]
    header = ["tau"] + [f"full_eig_{a}" for a in range(n)] + [f"effective_eig_{a}" for a in range(n)]
    rows = [[t, *f, *e] for t, f, e in zip(data["times"], data["full"], data["effective"])]
    if data["nu_infinity"] is not None:
        rows.append([math.inf, *data["nu_infinity"], *data["nu_infinity"]])
    return format_csv(header, rows)
