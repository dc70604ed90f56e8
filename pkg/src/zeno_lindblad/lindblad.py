"""Full Lindblad master equation: action, superoperator, RK4 propagation, NESS.

Physical time ``tau`` obeys ``d rho/d tau = -i[H, rho] + Gamma * sum_k r_k D_{L_k} rho``
(hbar = J0 = 1).  The rescaled form uses ``t = Gamma * tau``.

Vectorisation is column-major (stack columns): ``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ArgumentError,
    DegenerateNESSError,
    DimensionGuardError,
    IntegrationError,
    NonHermitianError,
)
from .operators import (
    HermitianEigensystem,
    Operator,
    TensorSpace,
    frobenius_norm,
    hermiticity_defect,
    partial_trace,
)

log = logging.getLogger(__name__)

MAX_SUPEROPERATOR_DIM = 4096


def vec(x: Operator | np.ndarray) -> np.ndarray:
    data = x.data if isinstance(x, Operator) else np.asarray(x)
    return data.reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    if dim is None:
        dim = math.isqrt(v.size)
    return np.asarray(v).reshape(dim, dim, order="F")


def trace_row(dim: int) -> np.ndarray:
    """Row vector ``t`` with ``t @ vec(X) == tr X``."""
    row = np.zeros(dim * dim, dtype=complex)
    row[np.arange(dim) * (dim + 1)] = 1.0
    return row


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> A X``."""
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> X B``."""
    return np.kron(b.T, np.eye(b.shape[0]))


def commutator_superop(h: np.ndarray) -> np.ndarray:
    return spre(h) - spost(h)


def dissipator_superop(l: np.ndarray) -> np.ndarray:
    ldl = l.conj().T @ l
    return np.kron(l.conj(), l) - 0.5 * spre(ldl) - 0.5 * spost(ldl)


def dissipator_apply(l: Operator, x: Operator) -> Operator:
    """``D_L X = L X L^dag - (L^dag L X + X L^dag L) / 2``."""
    l._check(x)
    ld = l.data.conj().T
    ldl = ld @ l.data
    out = l.data @ x.data @ ld - 0.5 * (ldl @ x.data + x.data @ ldl)
    return Operator(out, x.space)


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian, jump operators with rates, and global dissipation strength."""

    space: TensorSpace
    hamiltonian: Operator
    jumps: tuple[tuple[Operator, float], ...] = ()
    gamma: float = 1.0

    def __post_init__(self):
        jumps = tuple((op, float(rate)) for op, rate in self.jumps)
        object.__setattr__(self, "jumps", jumps)
        if not self.space.same_dims(self.hamiltonian.space):
            raise ArgumentError("hamiltonian does not live on the model space")
        h = self.hamiltonian
        if hermiticity_defect(h) > 1e-10 * max(1.0, frobenius_norm(h)):
            raise NonHermitianError("model hamiltonian is not Hermitian")
        for op, rate in jumps:
            if not self.space.same_dims(op.space):
                raise ArgumentError("jump operator does not live on the model space")
            if rate < 0:
                raise ArgumentError(f"negative jump rate {rate}")
        if not self.gamma > 0:
            raise ArgumentError(f"gamma must be positive, got {self.gamma}")

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def max_rate(self) -> float:
        return max((rate for _, rate in self.jumps), default=0.0)

    def with_gamma(self, gamma: float) -> "LindbladModel":
        return LindbladModel(self.space, self.hamiltonian, self.jumps, gamma)

    def dissipator(self, x: Operator) -> Operator:
        """Unit-strength dissipator ``sum_k r_k D_{L_k} x``."""
        out = np.zeros_like(x.data)
        for op, rate in self.jumps:
            if rate:
                out = out + rate * dissipator_apply(op, x).data
        return Operator(out, x.space)

    def dissipator_matrix(self) -> np.ndarray:
        d = self.dim
        out = np.zeros((d * d, d * d), dtype=complex)
        for op, rate in self.jumps:
            if rate:
                out += rate * dissipator_superop(op.data)
        return out


def liouvillian_apply(m: LindbladModel, rho: Operator, rescaled: bool = False) -> Operator:
    """Right-hand side of the LME in physical time, or in ``t = Gamma tau`` if ``rescaled``."""
    if not m.space.same_dims(rho.space):
        raise ArgumentError("state does not live on the model space")
    h = m.hamiltonian.data
    comm = h @ rho.data - rho.data @ h
    diss = m.dissipator(rho).data
    if rescaled:
        out = diss - (1j / m.gamma) * comm
    else:
        out = m.gamma * diss - 1j * comm
    return Operator(out, rho.space)


def superoperator_matrix(m: LindbladModel, rescaled: bool = False,
                         max_dim: int = MAX_SUPEROPERATOR_DIM) -> np.ndarray:
    d2 = m.dim ** 2
    if d2 > max_dim:
        raise DimensionGuardError(f"superoperator of size {d2} exceeds guard {max_dim}")
    diss = m.dissipator_matrix()
    comm = commutator_superop(m.hamiltonian.data)
    if rescaled:
        return diss - (1j / m.gamma) * comm
    return m.gamma * diss - 1j * comm


class DensityMatrix:
    """Validated state: Hermitian, unit trace, positive semidefinite (within tolerance)."""

    __slots__ = ("op",)

    HERMITIAN_TOL = 1e-9
    TRACE_TOL = 1e-9
    NEG_EIG_TOL = 1e-8

    def __init__(self, op: Operator | np.ndarray, space: TensorSpace | None = None):
        if not isinstance(op, Operator):
            op = Operator(op, space)
        object.__setattr__(self, "op", op)
        violation = density_violation(op)
        if violation is not None:
            raise ArgumentError(f"not a density matrix: {violation}")

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def data(self) -> np.ndarray:
        return self.op.data

    @property
    def space(self) -> TensorSpace:
        return self.op.space

    def __repr__(self):
        return f"DensityMatrix(dims={self.space.dims})"


def density_violation(op: Operator, herm_tol=DensityMatrix.HERMITIAN_TOL,
                      trace_tol=DensityMatrix.TRACE_TOL, eig_tol=DensityMatrix.NEG_EIG_TOL):
    """Describe the first violated density-matrix invariant, or return None."""
    defect = hermiticity_defect(op)
    if defect > herm_tol:
        return f"hermiticity defect {defect:.3e}"
    tr = op.tr()
    if abs(tr - 1) > trace_tol:
        return f"trace {tr:.12g}"
    lo = float(np.linalg.eigvalsh(0.5 * (op.data + op.data.conj().T))[0])
    if lo < -eig_tol:
        return f"negative eigenvalue {lo:.3e}"
    return None


def as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[DensityMatrix]
    trace_corrections: np.ndarray
    step: float
    n_steps: int
    notes: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]

    def reduced(self, over: Sequence[int] | None = None) -> list[Operator]:
        """``tr_{H0} rho(tau)`` at every recorded time (default: trace the dissipative sites)."""
        if over is None:
            over = self.states[0].space.dissipative
        if not over:
            return [s.op for s in self.states]
        return [partial_trace(s.op, over) for s in self.states]

    def populations(self, basis: HermitianEigensystem, over: Sequence[int] | None = None) -> np.ndarray:
        """Rows ``<alpha| tr_{H0} rho(tau) |alpha>`` for each recorded time."""
        return np.array([basis.expectation_diagonal(r) for r in self.reduced(over)])

    def reduced_spectra(self, over: Sequence[int] | None = None) -> np.ndarray:
        """Eigenvalues of ``tr_{H0} rho(tau)``, sorted descending, per recorded time."""
        out = []
        for r in self.reduced(over):
            herm = 0.5 * (r.data + r.data.conj().T)
            out.append(np.linalg.eigvalsh(herm)[::-1])
        return np.array(out)


def rk4_step_size(m: LindbladModel) -> float:
    """Fixed step ``min(0.05, 0.1 / (Gamma * rate_max + |H|_F))``."""
    scale = m.gamma * m.max_rate + frobenius_norm(m.hamiltonian)
    return 0.05 if scale == 0 else min(0.05, 0.1 / scale)


def rk4_step_matrix(generator: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for ``dv/dt = M v``.

    For a constant linear generator the four stages collapse exactly to the
    degree-4 Taylor polynomial of ``h M``.
    """
    hm = h * generator
    step = np.eye(generator.shape[0], dtype=complex)
    term = np.eye(generator.shape[0], dtype=complex)
    for k in range(1, 5):
        term = term @ hm / k
        step = step + term
    return step


def _record_times(t_end: float, record_every: float) -> np.ndarray:
    if t_end < 0 or record_every <= 0:
        raise ArgumentError("need t_end >= 0 and record_every > 0")
    n_full = int(math.floor(t_end / record_every + 1e-9))
    times = [k * record_every for k in range(n_full + 1)]
    if t_end - times[-1] > 1e-9 * max(1.0, t_end):
        times.append(t_end)
    return np.array(times)


def evolve(m: LindbladModel, rho0, t_end: float, record_every: float,
           step: float | None = None, stepwise: bool = False,
           tolerance: float = 1e-6) -> Trajectory:
    """Integrate the LME with fixed-step RK4 and record states every ``record_every``.

    The step is the ``rk4_step_size`` bound (or ``step``), shrunk so that an
    integer number of steps spans each record interval.  By default the steps of
    one interval are applied as a single matrix power of the RK4 step matrix and
    the trace is renormalised once per interval; ``stepwise=True`` applies and
    renormalises literally step by step.  The applied trace corrections are kept
    in ``Trajectory.trace_corrections`` (one value per interval, the largest
    per-step value when ``stepwise``).
    """
    rho0 = as_density(rho0)
    if not m.space.same_dims(rho0.space):
        raise ArgumentError("initial state does not live on the model space")
    d = m.dim
    generator = superoperator_matrix(m)
    h_max = rk4_step_size(m) if step is None else float(step)
    times = _record_times(t_end, record_every)
    diag = np.arange(d) * (d + 1)

    v = vec(rho0.op).copy()
    states = [rho0]
    corrections = [0.0]
    n_steps = 0
    cache: dict[tuple[int, float], np.ndarray] = {}
    h = None
    for k in range(1, len(times)):
        span = times[k] - times[k - 1]
        n_sub = max(1, int(math.ceil(span / h_max - 1e-9)))
        h_k = span / n_sub
        if h is None:
            h = h_k
        if stepwise:
            one = rk4_step_matrix(generator, h_k)
            worst = 0.0
            for j in range(n_sub):
                v = one @ v
                tr = v[diag].sum()
                corr = abs(tr - 1)
                if corr > tolerance:
                    raise IntegrationError(f"trace drifted to {tr:.12g}", n_steps + j + 1)
                worst = max(worst, corr)
                v = v / tr
        else:
            key = (n_sub, round(h_k, 15))
            if key not in cache:
                cache[key] = np.linalg.matrix_power(rk4_step_matrix(generator, h_k), n_sub)
            v = cache[key] @ v
            tr = v[diag].sum()
            worst = abs(tr - 1)
            if worst > tolerance:
                raise IntegrationError(f"trace drifted to {tr:.12g}", n_steps + n_sub)
            v = v / tr
        n_steps += n_sub
        op = Operator(unvec(v, d), m.space)
        violation = density_violation(op, tolerance, tolerance, tolerance)
        if violation is not None:
            raise IntegrationError(f"state invariant violated: {violation}", n_steps)
        states.append(DensityMatrix(op))
        corrections.append(float(worst))
    corrections = np.array(corrections)
    log.debug("evolve: %d steps of h=%.3e, max trace correction %.3e",
              n_steps, h or 0.0, corrections.max(initial=0.0))
    return Trajectory(times, states, corrections, h or h_max, n_steps)


def ness_full(m: LindbladModel, max_dim: int = MAX_SUPEROPERATOR_DIM) -> DensityMatrix:
    """Exact NESS from ``M vec(rho) = 0`` with the first row replaced by the trace functional."""
    d = m.dim
    generator = superoperator_matrix(m, max_dim=max_dim)
    sv = np.linalg.svd(generator, compute_uv=False)
    if sv.size > 1 and sv[-2] < 1e-8:
        raise DegenerateNESSError(f"Liouvillian kernel is not one-dimensional (second smallest singular value {sv[-2]:.3e})")
    system = generator.copy()
    system[0, :] = trace_row(d)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    v = np.linalg.solve(system, rhs)
    residual = float(np.linalg.norm(generator @ v))
    if residual > 1e-10 * max(1.0, sv[0]):
        raise DegenerateNESSError(f"NESS residual {residual:.3e} too large")
    rho = unvec(v, d)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(Operator(rho / np.trace(rho).real, m.space))
