"""Zeno-limit effective dynamics of the undissipated factors.

Conventions
-----------
* The local dissipator ``L0`` has unit strength: jump rates are folded in, the
  global factor Gamma is not.  Its eigenvalues ``xi_k`` are therefore the
  Gamma-free numbers (``0, -1/2, -1/2, -1`` for single-spin targeting).
* ``psi_k`` spans the dissipator eigenbasis with ``psi_0`` the unit-trace dark
  state; ``phi_k`` is the trace-dual basis, ``tr(phi_k psi_j) = delta_kj`` and
  ``phi_0 = I``.
* The undissipated factors keep their left-to-right order after the dissipative
  ones are traced out and are re-indexed from zero.

The reduced state ``R = tr_{H0} rho`` then obeys, in physical time,
``dR/dtau = -i[h_D + H_a/Gamma, R] + D_eff(R)/Gamma``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ArgumentError,
    ConstructionError,
    DecompositionError,
    DegenerateDarkStateError,
    LocalityError,
    NotDiagonalizableError,
)
from .lindblad import (
    LindbladModel,
    commutator_superop,
    dissipator_superop,
    unvec,
)
from .operators import (
    PAULI,
    Operator,
    TensorSpace,
    embed_local,
    frobenius_norm,
    identity,
    partial_trace,
    place,
)


@dataclass(frozen=True)
class TargetSpec:
    """Target spin state: Bloch angles of ``|0>`` and mixing ``mu``.

    The targeted state is ``(1+mu)/2 |0><0| + (1-mu)/2 |0perp><0perp|``.
    Negative ``mu`` is allowed and swaps the roles of ``|0>`` and ``|0perp>``.
    """

    theta: float = 0.0
    phi: float = 0.0
    mu: float = 1.0

    def __post_init__(self):
        if not abs(self.mu) <= 1.0:
            raise ArgumentError(f"|mu| must be <= 1, got {self.mu}")


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def bloch_frame(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal triplet ``n(theta, phi)``, ``n(pi/2 - theta, phi + pi)``, ``n(pi/2, phi + pi/2)``."""
    return (bloch_vector(theta, phi),
            bloch_vector(np.pi / 2 - theta, phi + np.pi),
            bloch_vector(np.pi / 2, phi + np.pi / 2))


def target_kets(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """``|0> = (cos(theta/2) e^{-i phi/2}, sin(theta/2) e^{i phi/2})`` and its orthogonal partner.

    The partner's phase is fixed to ``(sin(theta/2) e^{-i phi/2}, -cos(theta/2) e^{i phi/2})``,
    for which ``<0perp| sigma |0> = n' - i n''``.
    """
    a = np.cos(theta / 2) * np.exp(-0.5j * phi)
    b = np.sin(theta / 2) * np.exp(0.5j * phi)
    return np.array([a, b]), np.array([np.conj(b), -np.conj(a)])


def _ketbra(u, v) -> np.ndarray:
    return np.outer(u, np.conj(v))


def targeting_jumps(spec: TargetSpec) -> list[tuple[np.ndarray, float]]:
    """Bare jump operators ``|0><0perp|``, ``|0perp><0|`` with rates ``(1 + mu)/2``, ``(1 - mu)/2``.

    The first pumps into ``|0>``, so the dark state carries weight ``(1+mu)/2`` on ``|0>``.
    """
    k0, k1 = target_kets(spec.theta, spec.phi)
    return [(_ketbra(k0, k1), (1 + spec.mu) / 2), (_ketbra(k1, k0), (1 - spec.mu) / 2)]


def target_state(spec: TargetSpec) -> np.ndarray:
    k0, k1 = target_kets(spec.theta, spec.phi)
    return (1 + spec.mu) / 2 * _ketbra(k0, k0) + (1 - spec.mu) / 2 * _ketbra(k1, k1)


def single_spin_dissipator(spec: TargetSpec) -> tuple[Operator, Operator, Operator]:
    """Jump operators ``L1, L2`` (rates folded in) and the targeted state ``psi0``."""
    space = TensorSpace((2,))
    (j1, r1), (j2, r2) = targeting_jumps(spec)
    return (Operator(np.sqrt(r1) * j1, space), Operator(np.sqrt(r2) * j2, space),
            Operator(target_state(spec), space))


def local_dissipator_matrix(jumps: Sequence[tuple[np.ndarray, float]]) -> np.ndarray:
    """Unit-strength superoperator ``sum_k r_k D_{L_k}`` for a local jump list."""
    d = np.asarray(jumps[0][0]).shape[0]
    out = np.zeros((d * d, d * d), dtype=complex)
    for op, rate in jumps:
        out += rate * dissipator_superop(np.asarray(op, dtype=complex))
    return out


@dataclass(frozen=True, eq=False)
class DissipatorSpectrum:
    """Eigen-triples ``(psi_k, xi_k, phi_k)`` of a local dissipator, dark state first."""

    psis: np.ndarray
    xis: np.ndarray
    phis: np.ndarray
    dims: tuple[int, ...]
    labels: tuple = ()

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple((k,) for k in range(len(self.xis))))

    def __len__(self):
        return len(self.xis)

    @property
    def psi0(self) -> np.ndarray:
        return self.psis[0]

    @property
    def d0(self) -> int:
        return self.psis.shape[1]

    def duality_defect(self) -> float:
        gram = np.einsum("kab,jba->kj", self.phis, self.psis)
        return float(np.max(np.abs(gram - np.eye(len(self)))))

    def eigen_defect(self, l0: np.ndarray) -> float:
        """Max over k of ``|L0 psi_k - xi_k psi_k|``."""
        worst = 0.0
        for psi, xi in zip(self.psis, self.xis):
            out = unvec(l0 @ psi.reshape(-1, order="F"), self.d0)
            worst = max(worst, float(np.max(np.abs(out - xi * psi))))
        return worst


def dissipator_spectrum_analytic(spec: TargetSpec) -> DissipatorSpectrum:
    k0, k1 = target_kets(spec.theta, spec.phi)
    p0, p1 = _ketbra(k0, k0), _ketbra(k1, k1)
    mu = spec.mu
    psis = np.array([target_state(spec), _ketbra(k0, k1), _ketbra(k1, k0), p0 - p1])
    phis = np.array([np.eye(2), _ketbra(k1, k0), _ketbra(k0, k1), (1 - mu) / 2 * p0 - (1 + mu) / 2 * p1])
    xis = np.array([0.0, -0.5, -0.5, -1.0], dtype=complex)
    return DissipatorSpectrum(psis.astype(complex), xis, phis.astype(complex), (2,))


def dissipator_spectrum_numeric(l0: np.ndarray, dims: Sequence[int] | None = None,
                                kernel_tol: float = 1e-9, cond_max: float = 1e8) -> DissipatorSpectrum:
    """Eigendecomposition of a local dissipator superoperator (column-major vectorisation)."""
    l0 = np.asarray(l0, dtype=complex)
    d0 = int(round(np.sqrt(l0.shape[0])))
    dims = tuple(dims) if dims is not None else (d0,)
    values, vectors = np.linalg.eig(l0)
    scale = max(1.0, float(np.max(np.abs(values))))
    kernel = np.flatnonzero(np.abs(values) < kernel_tol * scale)
    if len(kernel) != 1:
        raise DegenerateDarkStateError(f"dissipator kernel has dimension {len(kernel)}, expected 1")
    cond = np.linalg.cond(vectors)
    if not cond < cond_max:
        raise NotDiagonalizableError(f"eigenvector matrix condition number {cond:.3e} exceeds {cond_max:.0e}")
    rest = [k for k in range(len(values)) if k != kernel[0]]
    rest.sort(key=lambda k: (-round(values[k].real, 10), round(values[k].imag, 10)))
    order = [kernel[0]] + rest
    values = values[order]
    values[0] = 0.0
    vectors = vectors[:, order]
    duals = np.linalg.inv(vectors)
    psis = np.array([unvec(vectors[:, k], d0) for k in range(len(order))])
    # Row k of the inverse is vec(phi_k^T): tr(phi_k psi_j) = sum vec(phi_k^T) * vec(psi_j).
    phis = np.array([unvec(duals[k], d0).T for k in range(len(order))])
    tr0 = np.trace(psis[0])
    psis[0] = psis[0] / tr0
    phis[0] = phis[0] * tr0
    if np.max(np.abs(phis[0] - np.eye(d0))) > 1e-8:
        raise ConstructionError("dual of the dark state is not the identity; not a trace-preserving dissipator")
    phis[0] = np.eye(d0)
    psis[0] = 0.5 * (psis[0] + psis[0].conj().T)
    return DissipatorSpectrum(psis, values, phis, dims)


def product_spectrum(*spectra: DissipatorSpectrum) -> DissipatorSpectrum:
    """Spectrum of ``sum_j L0^(j)`` acting on the tensor product of the factors."""
    psis, phis, xis, labels = [], [], [], []
    for combo in itertools.product(*(range(len(s)) for s in spectra)):
        psi, phi, xi = np.ones((1, 1), dtype=complex), np.ones((1, 1), dtype=complex), 0.0
        label = []
        for s, k in zip(spectra, combo):
            psi = np.kron(psi, s.psis[k])
            phi = np.kron(phi, s.phis[k])
            xi = xi + s.xis[k]
            label.extend(s.labels[k])
        psis.append(psi)
        phis.append(phi)
        xis.append(xi)
        labels.append(tuple(label))
    dims = tuple(d for s in spectra for d in s.dims)
    return DissipatorSpectrum(np.array(psis), np.array(xis, dtype=complex), np.array(phis), dims, tuple(labels))


def coeffs_C(spectrum: DissipatorSpectrum) -> np.ndarray:
    """``C_mn = tr(phi_m^dag phi_n psi_0)``."""
    phis = spectrum.phis
    return np.einsum("mba,nbc,ca->mn", phis.conj(), phis, spectrum.psi0)


def _sites(h: Operator, sites) -> tuple[int, ...]:
    sites = tuple(sorted(h.space.dissipative_sites if sites is None else sites))
    if not sites:
        raise ArgumentError("no dissipative sites given")
    return sites


def hamiltonian_components_g(h: Operator, spectrum: DissipatorSpectrum,
                             sites: Sequence[int] | None = None) -> list[Operator]:
    """Components ``g_k = tr_{H0}((psi_k (x) I) H)`` with ``H = sum_n phi_n (x) g_n`` checked."""
    sites = _sites(h, sites)
    if tuple(h.space.dims[s] for s in sites) != spectrum.dims:
        raise ArgumentError("spectrum dims do not match the dissipative factors of the Hamiltonian")
    rest = [i for i in range(h.space.n_factors) if i not in sites]
    space0 = TensorSpace(spectrum.dims)
    space1 = h.space.subspace(rest)
    eye1 = identity(space1)
    gs = []
    for psi in spectrum.psis:
        gs.append(partial_trace(place(Operator(psi, space0), eye1, sites, h.space) @ h, sites))
    recon = np.zeros_like(h.data)
    for phi, g in zip(spectrum.phis, gs):
        recon = recon + place(Operator(phi, space0), g, sites, h.space).data
    residual = float(np.linalg.norm(recon - h.data))
    if residual > 1e-8 * max(1.0, frobenius_norm(h)):
        raise DecompositionError(f"H != sum phi_n (x) g_n (residual {residual:.3e})")
    return gs


def projected_hamiltonian(h: Operator, psi0: Operator | np.ndarray,
                          sites: Sequence[int] | None = None) -> Operator:
    """Dissipation-projected Hamiltonian ``h_D = tr_{H0}((psi0 (x) I) H)``."""
    sites = _sites(h, sites)
    p = psi0.data if isinstance(psi0, Operator) else np.asarray(psi0, dtype=complex)
    if abs(np.trace(p) - 1) > 1e-10 or np.linalg.norm(p - p.conj().T) > 1e-10:
        raise ArgumentError("psi0 must be a Hermitian unit-trace operator")
    if np.linalg.eigvalsh(0.5 * (p + p.conj().T))[0] < -1e-10:
        raise ArgumentError("psi0 must be positive semidefinite")
    rest = [i for i in range(h.space.n_factors) if i not in sites]
    space0 = TensorSpace(tuple(h.space.dims[s] for s in sites))
    hd = partial_trace(place(Operator(p, space0), identity(h.space.subspace(rest)), sites, h.space) @ h, sites)
    return Operator(0.5 * (hd.data + hd.data.conj().T), hd.space)


@dataclass(frozen=True, eq=False)
class EffectiveGenerator:
    h_a: Operator
    a_matrix: np.ndarray
    b_matrix: np.ndarray
    canonical_jumps: tuple[tuple[Operator, float], ...]


def effective_generator(C: np.ndarray, xis: np.ndarray, g_ops: Sequence[Operator],
                        active: Sequence[int] | None = None, rate_cutoff: float = 1e-12) -> EffectiveGenerator:
    """Weak dissipator and coherent correction from second-order elimination.

    ``Y_mn = -C_mn / conj(xi_m)`` over ``m, n > 0`` (or over ``active``),
    ``A = Y + Y^dag``, ``B = (Y - Y^dag) / 2i``, ``H_a = sum B_mn g_m^dag g_n`` and
    ``D(R) = sum A_mn (g_n R g_m^dag - {g_m^dag g_n, R}/2)``.
    Canonical jumps come from ``A = U diag(a) U^dag`` as ``L_k = sum_n conj(U_nk) g_n``.
    """
    idx = np.array(list(range(1, len(xis))) if active is None else list(active), dtype=int)
    if np.any(idx == 0):
        raise ArgumentError("index 0 (dark state) cannot enter the effective generator")
    xi = np.asarray(xis)[idx]
    if np.any(xi.real >= 0):
        raise ConstructionError("all non-dark dissipator eigenvalues need negative real part")
    Y = -np.asarray(C)[np.ix_(idx, idx)] / np.conj(xi)[:, None]
    A = Y + Y.conj().T
    B = (Y - Y.conj().T) / 2j
    A = 0.5 * (A + A.conj().T)
    B = 0.5 * (B + B.conj().T)
    gs = [g_ops[i] for i in idx]
    space = g_ops[0].space
    if len(idx) == 0:
        zero = Operator(np.zeros((space.dim, space.dim)), space)
        return EffectiveGenerator(zero, A, B, ())
    a, U = np.linalg.eigh(A)
    if a[0] < -1e-10 * max(1.0, float(np.max(np.abs(a)))):
        raise ConstructionError(f"coefficient matrix A is not positive semidefinite (min eigenvalue {a[0]:.3e})")
    stack = np.array([g.data for g in gs])
    h_a = np.einsum("mn,mba,nbc->ac", B, stack.conj(), stack)
    jumps = []
    for k in range(len(a)):
        if a[k] < rate_cutoff:
            continue
        op = np.einsum("n,nab->ab", U[:, k].conj(), stack)
        if np.linalg.norm(op) < 1e-14:
            continue
        jumps.append((Operator(op, space), float(a[k])))
    return EffectiveGenerator(Operator(0.5 * (h_a + h_a.conj().T), space), A, B, tuple(jumps))


@dataclass(frozen=True, eq=False)
class EffectiveModel:
    """Zeno-limit effective model for ``R = tr_{H0} rho``."""

    h_d: Operator
    h_a: Operator
    g_ops: tuple[Operator, ...]
    labels: tuple
    a_matrix: np.ndarray
    b_matrix: np.ndarray
    canonical_jumps: tuple[tuple[Operator, float], ...]
    gamma: float
    psi0: Operator
    full_space: TensorSpace
    spectrum: DissipatorSpectrum = field(repr=False, default=None)
    g0: Operator | None = field(repr=False, default=None)

    @property
    def space(self) -> TensorSpace:
        return self.h_d.space

    @property
    def sites(self) -> tuple[int, ...]:
        return self.full_space.dissipative

    @property
    def h_a_norm(self) -> float:
        return frobenius_norm(self.h_a)

    def with_gamma(self, gamma: float) -> "EffectiveModel":
        return EffectiveModel(self.h_d, self.h_a, self.g_ops, self.labels, self.a_matrix, self.b_matrix,
                              self.canonical_jumps, float(gamma), self.psi0, self.full_space,
                              self.spectrum, self.g0)

    def dissipator_apply(self, r: Operator) -> Operator:
        """``D_eff R`` evaluated from the coefficient matrix A."""
        out = np.zeros_like(r.data)
        for m, gm in enumerate(self.g_ops):
            gmd = gm.data.conj().T
            for n, gn in enumerate(self.g_ops):
                a = self.a_matrix[m, n]
                if a == 0:
                    continue
                prod = gmd @ gn.data
                out = out + a * (gn.data @ r.data @ gmd - 0.5 * (prod @ r.data + r.data @ prod))
        return Operator(out, r.space)

    def generator_apply(self, r: Operator) -> Operator:
        """``W R = -i[H_a, R] + D_eff R`` (Gamma-free)."""
        comm = self.h_a.data @ r.data - r.data @ self.h_a.data
        return Operator(-1j * comm + self.dissipator_apply(r).data, r.space)

    def superoperator(self) -> np.ndarray:
        """Matrix of ``W = -i[H_a, .] + sum_k A_k D_{L_k}`` on vec(R)."""
        out = -1j * commutator_superop(self.h_a.data)
        for op, rate in self.canonical_jumps:
            out = out + rate * dissipator_superop(op.data)
        return out

    def to_lindblad(self) -> LindbladModel:
        """Effective LME in physical time as a model with dissipation strength ``1/Gamma``."""
        h = self.h_d + self.h_a / self.gamma
        return LindbladModel(self.space, h, self.canonical_jumps, 1.0 / self.gamma)

    def embed(self, r: Operator | np.ndarray) -> Operator:
        """``psi0 (x) R`` written in the full chain ordering."""
        if not isinstance(r, Operator):
            r = Operator(r, self.space)
        return place(self.psi0, r.with_space(self.space), self.sites, self.full_space)

    def trace_out(self, rho: Operator) -> Operator:
        return partial_trace(rho, self.sites).with_space(self.space)


def reduce_hamiltonian(h: Operator, spectrum: DissipatorSpectrum, gamma: float = 1.0,
                       sites: Sequence[int] | None = None, zero_tol: float = 1e-13) -> EffectiveModel:
    """General reduction for one (possibly composite) dissipative block."""
    sites = _sites(h, sites)
    full_space = TensorSpace(h.space.dims, frozenset(sites))
    h = h.with_space(full_space)
    gs = hamiltonian_components_g(h, spectrum, sites)
    C = coeffs_C(spectrum)
    scale = max(1.0, frobenius_norm(h))
    active = [k for k in range(1, len(gs)) if frobenius_norm(gs[k]) > zero_tol * scale]
    gen = effective_generator(C, spectrum.xis, gs, active)
    h_d = projected_hamiltonian(h, spectrum.psi0, sites)
    space1 = h_d.space
    return EffectiveModel(
        h_d=h_d,
        h_a=gen.h_a.with_space(space1),
        g_ops=tuple(gs[k].with_space(space1) for k in active),
        labels=tuple(spectrum.labels[k] for k in active),
        a_matrix=gen.a_matrix,
        b_matrix=gen.b_matrix,
        canonical_jumps=tuple((op.with_space(space1), r) for op, r in gen.canonical_jumps),
        gamma=float(gamma),
        psi0=Operator(spectrum.psi0, TensorSpace(spectrum.dims)),
        full_space=full_space,
        spectrum=spectrum,
        g0=gs[0].with_space(space1),
    )


def reduce_single_boundary(h: Operator, spec: TargetSpec, site: int = 0, gamma: float = 1.0) -> EffectiveModel:
    return reduce_hamiltonian(h, dissipator_spectrum_analytic(spec), gamma, (site,))


def mixed_target_dissipator_superop(g1: Operator, g3: Operator, mu: float) -> np.ndarray:
    """``2(1+mu) D_{g1} + 2(1-mu) D_{g1^dag} + (1-mu^2)/2 D_{g3}`` as a matrix."""
    return (2 * (1 + mu) * dissipator_superop(g1.data)
            + 2 * (1 - mu) * dissipator_superop(g1.data.conj().T)
            + 0.5 * (1 - mu * mu) * dissipator_superop(g3.data))


def compose_two_boundary(h: Operator, left: TargetSpec, right: TargetSpec, gamma: float = 1.0,
                         locality_tol: float = 1e-12) -> EffectiveModel:
    """Effective model with targeting dissipation on the first and last factors."""
    n = h.space.n_factors
    if n < 3:
        raise ArgumentError(f"two-boundary composition needs at least 3 sites, got {n}")
    sites = (0, n - 1)
    spectrum = product_spectrum(dissipator_spectrum_analytic(left), dissipator_spectrum_analytic(right))
    full_space = TensorSpace(h.space.dims, frozenset(sites))
    h = h.with_space(full_space)
    gs = hamiltonian_components_g(h, spectrum, sites)
    scale = max(1.0, frobenius_norm(h))
    for label, g in zip(spectrum.labels, gs):
        if label[0] and label[1] and frobenius_norm(g) > locality_tol * scale:
            raise LocalityError(f"component g_{label} = {frobenius_norm(g):.3e} is nonzero; "
                                "Hamiltonian couples the two dissipative sites")
    eff = reduce_hamiltonian(h, spectrum, gamma, sites)
    lookup = dict(zip(spectrum.labels, gs))
    g = {lab: lookup[lab].with_space(eff.space) for lab in [(1, 0), (3, 0), (0, 1), (0, 3)]}
    expected = (mixed_target_dissipator_superop(g[1, 0], g[3, 0], left.mu)
                + mixed_target_dissipator_superop(g[0, 1], g[0, 3], right.mu))
    got = eff.superoperator() + 1j * commutator_superop(eff.h_a.data)
    if np.max(np.abs(got - expected), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(expected), initial=0.0)):
        raise ConstructionError("effective dissipator does not split into left and right boundary terms")
    return eff


def xyz_chain_hamiltonian(n_sites: int, jx: float, jy: float, jz: float,
                          dissipative_sites: Sequence[int] = ()) -> Operator:
    """Open chain ``sum_n sigma_n . (J sigma_{n+1})`` with ``J = diag(jx, jy, jz)``."""
    if n_sites < 2:
        raise ArgumentError("an XYZ chain needs at least 2 sites")
    space = TensorSpace.qubits(n_sites, dissipative_sites)
    bond = sum(j * np.kron(s, s) for j, s in zip((jx, jy, jz), PAULI))
    bond_op = Operator(bond, TensorSpace((2, 2)))
    data = np.zeros((space.dim, space.dim), dtype=complex)
    for k in range(n_sites - 1):
        data += embed_local(bond_op, k, space.subspace(range(n_sites))).data
    return Operator(data, space)


def chain_full_model(h: Operator, left: TargetSpec, right: TargetSpec | None, gamma: float) -> LindbladModel:
    """Full LME with targeting jumps on site 0 (and on the last site if ``right`` is given)."""
    n = h.space.n_factors
    sites = (0,) if right is None else (0, n - 1)
    space = TensorSpace(h.space.dims, frozenset(sites))
    plain = space.subspace(range(n))
    jumps = []
    for site, spec in zip(sites, (left, right)):
        for op, rate in targeting_jumps(spec):
            jumps.append((embed_local(Operator(op, TensorSpace((2,))), site, plain).with_space(space), rate))
    return LindbladModel(space, h.with_space(space), tuple(jumps), gamma)


def chain_target_state(left: TargetSpec, right: TargetSpec | None) -> Operator:
    if right is None:
        return Operator(target_state(left), TensorSpace((2,)))
    return Operator(np.kron(target_state(left), target_state(right)), TensorSpace((2, 2)))
