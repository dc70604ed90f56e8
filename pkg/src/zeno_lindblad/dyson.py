"""Brute-force superoperator checks of the second-order Zeno elimination.

Everything here is built from the full unit-strength dissipator matrix of a
model, independently of the analytic spectral data in ``zeno``:

* ``P0 = lim exp(L0 t)`` (evaluated at a time far beyond the slowest decay),
* ``Q0 = 1 - P0`` and the pseudo-inverse ``S = (L0 + P0)^{-1} - P0``,
* the dark state recovered as ``tr_{H1} P0(I/d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ArgumentError, DegenerateDarkStateError
from .lindblad import LindbladModel, commutator_superop, unvec, vec
from .operators import Operator, TensorSpace, partial_trace, place, random_hermitian


@dataclass(frozen=True, eq=False)
class Projectors:
    l0: np.ndarray
    p0: np.ndarray
    q0: np.ndarray
    s: np.ndarray
    psi0: Operator
    space: TensorSpace

    @property
    def sites(self) -> tuple[int, ...]:
        return self.space.dissipative

    @property
    def free(self) -> tuple[int, ...]:
        return self.space.free


def kernel_projectors(m: LindbladModel, kernel_tol: float = 1e-9) -> Projectors:
    sites = m.space.dissipative
    if not sites:
        raise ArgumentError("model has no dissipative sites")
    d = m.dim
    l0 = m.dissipator_matrix()
    values = np.linalg.eigvals(l0)
    zero = np.abs(values) < kernel_tol * max(1.0, float(np.max(np.abs(values))))
    d1 = m.space.d1
    if zero.sum() != d1 * d1:
        raise DegenerateDarkStateError(f"kernel of L0 has dimension {zero.sum()}, expected {d1 * d1}")
    gap = float(np.min(-values[~zero].real))
    if gap <= 0:
        raise DegenerateDarkStateError("dissipator has non-decaying modes outside its kernel")
    p0 = expm(l0 * (40.0 / gap))
    q0 = np.eye(d * d) - p0
    s = np.linalg.inv(l0 + p0) - p0
    mixed = p0 @ vec(np.eye(d) / d)
    psi0 = partial_trace(Operator(unvec(mixed, d), m.space), m.space.free)
    psi0 = Operator(0.5 * (psi0.data + psi0.data.conj().T) / psi0.tr().real, TensorSpace(psi0.space.dims))
    return Projectors(l0, p0, q0, s, psi0, m.space)


def partial_trace_matrix(space: TensorSpace, over) -> np.ndarray:
    """Matrix of ``X -> tr_over X`` on column-major vectors."""
    d = space.dim
    cols = []
    for j in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[j] = 1.0
        cols.append(vec(partial_trace(Operator(unvec(e, d), space.dims), over)))
    return np.array(cols).T


def embedding_matrix(proj: Projectors) -> np.ndarray:
    """Matrix of ``R -> psi0 (x) R`` (dark state on the dissipative sites)."""
    space1 = proj.space.subspace(proj.free)
    d1 = space1.dim
    cols = []
    for j in range(d1 * d1):
        e = np.zeros(d1 * d1, dtype=complex)
        e[j] = 1.0
        cols.append(vec(place(proj.psi0, Operator(unvec(e, d1), space1), proj.sites, proj.space)))
    return np.array(cols).T


def brute_force_effective_superoperator(m: LindbladModel, proj: Projectors | None = None) -> np.ndarray:
    """``-Gamma^2 tr_{H0} o P0 K Q0 S K P0 o (psi0 (x) .)`` with ``K = -(i/Gamma)[H, .]``.

    Gamma cancels, so ``K`` is taken at unit strength.
    """
    proj = kernel_projectors(m) if proj is None else proj
    k = -1j * commutator_superop(m.hamiltonian.data)
    tr0 = partial_trace_matrix(m.space, proj.sites)
    emb = embedding_matrix(proj)
    return -tr0 @ proj.p0 @ k @ proj.q0 @ proj.s @ k @ proj.p0 @ emb


def dyson_propagator_residual(m: LindbladModel, t: float, gamma: float, proj: Projectors | None = None,
                              ord=2) -> float:
    """``|P0 e^{Lt} P0 - [P0 + t P0KP0 + t^2/2 (P0KP0)^2 - t P0KQ0SKP0]|`` in rescaled time."""
    proj = kernel_projectors(m) if proj is None else proj
    p0, q0, s = proj.p0, proj.q0, proj.s
    k = (-1j / gamma) * commutator_superop(m.hamiltonian.data)
    exact = p0 @ expm((proj.l0 + k) * t) @ p0
    pkp = p0 @ k @ p0
    approx = p0 + t * pkp + 0.5 * t * t * pkp @ pkp - t * p0 @ k @ q0 @ s @ k @ p0
    return float(np.linalg.norm(exact - approx, ord))


@dataclass
class DysonReport:
    pseudo_inverse_residual: float
    projector_action_residual: float
    idempotence_residual: float
    propagator_residuals: dict = field(default_factory=dict)
    psi0: Operator | None = None

    def passed(self, identity_tol: float = 1e-10) -> bool:
        return max(self.pseudo_inverse_residual, self.projector_action_residual,
                   self.idempotence_residual) <= identity_tol

    def as_dict(self) -> dict:
        return {
            "pseudo_inverse_residual": self.pseudo_inverse_residual,
            "projector_action_residual": self.projector_action_residual,
            "idempotence_residual": self.idempotence_residual,
            "propagator_residuals": [
                {"gamma": g, "t": t, "residual": r} for (g, t), r in sorted(self.propagator_residuals.items())
            ],
        }


def verify_dyson(m: LindbladModel, gammas=(50.0, 200.0), times=(0.5, 1.0, 2.0),
                 n_random: int = 5, seed: int = 0) -> DysonReport:
    """Check ``L0 S = S L0 = Q0``, ``P0 X = psi0 (x) tr_{H0} X`` and the second-order propagator."""
    proj = kernel_projectors(m)
    l0, p0, q0, s = proj.l0, proj.p0, proj.q0, proj.s
    pinv = max(float(np.max(np.abs(l0 @ s - q0))), float(np.max(np.abs(s @ l0 - q0))))
    idem = float(np.max(np.abs(p0 @ p0 - p0)))
    rng = np.random.default_rng(seed)
    d = m.dim
    space1 = m.space.subspace(proj.free)
    action = 0.0
    for _ in range(n_random):
        x = Operator(random_hermitian(d, rng) + 1j * random_hermitian(d, rng), m.space)
        lhs = unvec(p0 @ vec(x), d)
        r = partial_trace(x, proj.sites).with_space(space1)
        rhs = place(proj.psi0, r, proj.sites, m.space).data
        action = max(action, float(np.max(np.abs(lhs - rhs))))
    props = {}
    for g in gammas:
        for t in times:
            props[(float(g), float(t))] = dyson_propagator_residual(m, t, g, proj)
    return DysonReport(pinv, action, idem, props, proj.psi0)
