"""Classical Markov reduction on the eigenstates of the projected Hamiltonian.

Orientation: ``rates[b, a]`` is the rate of the jump ``b -> a``,
``(1/Gamma) sum_k A_k |<a|L_k|b>|^2``.  The generator acts on column
probability vectors, ``d nu/d tau = F nu`` with ``F[a, b] = rates[b, a]`` off the
diagonal and ``F[a, a] = -sum_b rates[a, b]``.

Two-state example: if only ``rates[1, 0] = w`` is nonzero (state 1 decays into
state 0) then ``F = [[0, w], [0, -w]]`` and all weight ends in state 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.sparse.csgraph import connected_components

from .errors import ArgumentError, ContractError, DegenerateSpectrumError, NonUniqueStationaryError
from .lindblad import DensityMatrix
from .operators import HermitianEigensystem, hermitian_eig
from .zeno import EffectiveModel


@dataclass(frozen=True, eq=False)
class MarkovChain:
    basis: HermitianEigensystem
    rates: np.ndarray
    gamma: float

    def __post_init__(self):
        off = self.rates - np.diag(np.diag(self.rates))
        if np.any(off < 0):
            raise ContractError("negative transition rate")

    @property
    def generator(self) -> np.ndarray:
        return generator_from_rates(self.rates)

    def __len__(self):
        return self.rates.shape[0]


def generator_from_rates(rates: np.ndarray) -> np.ndarray:
    w = np.array(rates, dtype=float)
    np.fill_diagonal(w, 0.0)
    return w.T - np.diag(w.sum(axis=1))


def degenerate_pairs(values: Sequence[float], rel_gap: float = 1e-8) -> list[tuple[int, int]]:
    values = np.asarray(values)
    span = float(values[-1] - values[0]) if len(values) > 1 else 0.0
    return [(i, i + 1) for i in range(len(values) - 1) if values[i + 1] - values[i] <= rel_gap * span]


def markov_rates(eff: EffectiveModel, rel_gap: float = 1e-8) -> MarkovChain:
    basis = hermitian_eig(eff.h_d)
    pairs = degenerate_pairs(basis.values, rel_gap)
    if pairs:
        detail = ", ".join(f"({i},{j}): {basis.values[i]:.12g} ~ {basis.values[j]:.12g}" for i, j in pairs)
        raise DegenerateSpectrumError(f"h_D spectrum is degenerate: {detail}", pairs)
    v = basis.vectors
    n = len(basis)
    rates = np.zeros((n, n))
    for op, a_k in eff.canonical_jumps:
        amp = v.conj().T @ op.data @ v  # amp[a, b] = <a|L|b>
        rates += a_k * np.abs(amp.T) ** 2
    rates /= eff.gamma
    np.fill_diagonal(rates, 0.0)
    return MarkovChain(basis, rates, eff.gamma)


def closed_classes(rates: np.ndarray, tol: float = 0.0) -> list[np.ndarray]:
    """Closed communicating classes of the support graph of ``rates``."""
    adj = (np.asarray(rates) > tol).astype(int)
    np.fill_diagonal(adj, 0)
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    closed = []
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        outside = np.flatnonzero(labels != c)
        if not adj[np.ix_(members, outside)].any():
            closed.append(members)
    return closed


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    nu_infinity: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.nu_infinity, dtype=float)
        if np.any(nu < -1e-12):
            raise ContractError(f"stationary vector has negative entry {nu.min():.3e}")
        nu = np.clip(nu, 0.0, None)
        object.__setattr__(self, "nu_infinity", nu / nu.sum())


def stationary_distribution(mc: MarkovChain | np.ndarray) -> StationaryDistribution:
    """Unique stationary vector of ``F nu = 0``, normalised to unit sum."""
    rates = mc.rates if isinstance(mc, MarkovChain) else np.asarray(mc, dtype=float)
    n = rates.shape[0]
    if n == 1:
        return StationaryDistribution(np.ones(1))
    classes = closed_classes(rates)
    if len(classes) != 1:
        raise NonUniqueStationaryError(f"{len(classes)} closed classes; stationary state is not unique")
    F = generator_from_rates(rates)
    # Rates scale as 1/Gamma; normalising F makes the solve Gamma-independent.
    F = F / np.max(np.abs(F))
    system = F.copy()
    system[0, :] = 1.0
    rhs = np.zeros(n)
    rhs[0] = 1.0
    nu = np.linalg.solve(system, rhs)
    nu[np.abs(nu) < 1e-15] = 0.0
    return StationaryDistribution(nu)


def evolve_populations(mc: MarkovChain, nu0: Sequence[float], t_end: float,
                       record_every: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact solution ``nu(tau) = exp(F tau) nu0`` at ``0, dt, 2 dt, ...`` (plus ``t_end``)."""
    nu0 = np.asarray(nu0, dtype=float)
    if nu0.shape != (len(mc),) or np.any(nu0 < -1e-12) or abs(nu0.sum() - 1) > 1e-9:
        raise ArgumentError("nu0 must be a probability vector over the h_D eigenstates")
    from .lindblad import _record_times

    times = _record_times(t_end, record_every)
    F = mc.generator
    series = np.array([expm(F * t) @ nu0 for t in times])
    return times, series


def assemble_R_infinity(nu: StationaryDistribution | Sequence[float], basis: HermitianEigensystem) -> DensityMatrix:
    """``R_inf = sum_a nu_a |a><a|``."""
    weights = nu.nu_infinity if isinstance(nu, StationaryDistribution) else np.asarray(nu, dtype=float)
    return DensityMatrix(basis.from_diagonal(weights))


def zeno_ness(eff: EffectiveModel) -> tuple[MarkovChain, StationaryDistribution, DensityMatrix]:
    mc = markov_rates(eff)
    nu = stationary_distribution(mc)
    return mc, nu, assemble_R_infinity(nu, mc.basis)
