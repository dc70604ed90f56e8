"""Dense tensor-product operator algebra.

Index convention: a basis state of a space with factor dimensions
``(d_0, ..., d_{n-1})`` is addressed in mixed radix, row-major, with factor 0
the leftmost (slowest) tensor factor.  This is the ordering produced by
``np.kron(a, b)`` and is used by every module of the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, NonHermitianError


@dataclass(frozen=True)
class TensorSpace:
    """Ordered tensor factors plus the subset that carries strong dissipation."""

    dims: tuple[int, ...]
    dissipative_sites: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        sites = frozenset(int(s) for s in self.dissipative_sites)
        if any(d < 2 for d in dims):
            raise ArgumentError(f"all factor dimensions must be >= 2, got {dims}")
        if any(s < 0 or s >= len(dims) for s in sites):
            raise ArgumentError(f"dissipative sites {sorted(sites)} out of range for {len(dims)} factors")
        if dims and len(sites) == len(dims):
            raise ArgumentError("dissipative_sites must be a strict subset of the factors")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "dissipative_sites", sites)

    @classmethod
    def qubits(cls, n: int, dissipative_sites: Iterable[int] = ()) -> "TensorSpace":
        return cls((2,) * n, frozenset(dissipative_sites))

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def dissipative(self) -> tuple[int, ...]:
        return tuple(sorted(self.dissipative_sites))

    @property
    def free(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_factors) if i not in self.dissipative_sites)

    @property
    def d0(self) -> int:
        return int(np.prod([self.dims[i] for i in self.dissipative], dtype=np.int64))

    @property
    def d1(self) -> int:
        return self.dim // self.d0

    def subspace(self, sites: Sequence[int]) -> "TensorSpace":
        """Space made of the given factors, in the given order (no dissipative tag)."""
        return TensorSpace(tuple(self.dims[i] for i in sites))

    def same_dims(self, other: "TensorSpace") -> bool:
        return self.dims == other.dims


class Operator:
    """Immutable dense complex matrix on a :class:`TensorSpace`."""

    __slots__ = ("space", "data")

    def __init__(self, data, space: TensorSpace | Sequence[int] | None = None):
        arr = np.array(data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ArgumentError(f"operator data must be a square matrix, got shape {arr.shape}")
        if space is None:
            space = TensorSpace((arr.shape[0],)) if arr.shape[0] > 1 else TensorSpace(())
        elif not isinstance(space, TensorSpace):
            space = TensorSpace(tuple(space))
        if arr.shape[0] != space.dim:
            raise ArgumentError(f"matrix of size {arr.shape[0]} does not match space dims {space.dims}")
        arr.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def __repr__(self):
        return f"Operator(dims={self.space.dims}, dissipative={sorted(self.space.dissipative_sites)})"

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.dims

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            raise ArgumentError(f"expected Operator, got {type(other).__name__}")
        if not self.space.same_dims(other.space):
            raise ArgumentError(f"space mismatch: {self.space.dims} vs {other.space.dims}")

    def with_space(self, space: TensorSpace) -> "Operator":
        return Operator(self.data, space)

    def __add__(self, other):
        self._check(other)
        return Operator(self.data + other.data, self.space)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.data - other.data, self.space)

    def __neg__(self):
        return Operator(-self.data, self.space)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(self.data * complex(scalar), self.space)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.data / complex(scalar), self.space)

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.data @ other.data, self.space)

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.space)

    def tr(self) -> complex:
        return complex(np.trace(self.data))

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return hermiticity_defect(self) <= tol * max(1.0, frobenius_norm(self))


# Pauli matrices in the computational basis |0> = (1, 0), |1> = (0, 1).
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def identity(space: TensorSpace | Sequence[int]) -> Operator:
    if not isinstance(space, TensorSpace):
        space = TensorSpace(tuple(space))
    return Operator(np.eye(space.dim), space)


def kron(*ops: Operator) -> Operator:
    """Tensor product; dissipative tags of the operands are carried over."""
    if not ops:
        raise ArgumentError("kron needs at least one operand")
    dims: list[int] = []
    sites: set[int] = set()
    for op in ops:
        sites.update(s + len(dims) for s in op.space.dissipative_sites)
        dims.extend(op.space.dims)
    data = reduce(np.kron, (op.data for op in ops))
    return Operator(data, TensorSpace(tuple(dims), frozenset(sites)))


def reorder(x: Operator, order: Sequence[int]) -> Operator:
    """Permute tensor factors: factor ``j`` of the result is factor ``order[j]`` of ``x``."""
    n = x.space.n_factors
    order = [int(o) for o in order]
    if sorted(order) != list(range(n)):
        raise ArgumentError(f"{order} is not a permutation of {n} factors")
    dims = x.space.dims
    t = x.data.reshape(dims + dims).transpose(order + [n + o for o in order])
    inv = {o: j for j, o in enumerate(order)}
    new_space = TensorSpace(tuple(dims[o] for o in order),
                            frozenset(inv[s] for s in x.space.dissipative_sites))
    return Operator(t.reshape(x.dim, x.dim), new_space)


def place(a: Operator, b: Operator, sites: Sequence[int], space: TensorSpace) -> Operator:
    """Operator equal to ``a`` on ``sites`` (in that order) tensored with ``b`` on the rest.

    This is the ``a (x) b`` of a split ``H = H_sites (x) H_rest`` written back in
    the natural factor order of ``space``.
    """
    sites = list(sites)
    rest = [i for i in range(space.n_factors) if i not in sites]
    if tuple(space.dims[i] for i in sites) != a.space.dims or tuple(space.dims[i] for i in rest) != b.space.dims:
        raise ArgumentError("operand dims do not fit the requested placement")
    stacked = Operator(np.kron(a.data, b.data), TensorSpace(a.space.dims + b.space.dims))
    listing = sites + rest
    return reorder(stacked, [listing.index(p) for p in range(space.n_factors)]).with_space(space)


def partial_trace(x: Operator, over: Iterable[int]) -> Operator:
    """Trace out the factors in ``over``; remaining factors keep their relative order."""
    over = sorted(set(int(i) for i in over))
    n = x.space.n_factors
    if any(i < 0 or i >= n for i in over):
        raise ArgumentError(f"factor indices {over} out of range for {n} factors")
    dims = x.space.dims
    keep = [i for i in range(n) if i not in over]
    t = x.data.reshape(dims + dims)
    # Trace from the highest index down so lower axis positions stay valid.
    for count, i in enumerate(reversed(over)):
        m = n - count
        t = np.trace(t, axis1=i, axis2=i + m)
    d = int(np.prod([dims[i] for i in keep], dtype=np.int64))
    kept_diss = frozenset(keep.index(s) for s in x.space.dissipative_sites if s in keep)
    if len(kept_diss) == len(keep):
        kept_diss = frozenset()
    space = TensorSpace(tuple(dims[i] for i in keep), kept_diss)
    return Operator(np.asarray(t).reshape(d, d), space)


def commutator(h: Operator, x: Operator) -> Operator:
    h._check(x)
    return Operator(h.data @ x.data - x.data @ h.data, x.space)


def anticommutator(h: Operator, x: Operator) -> Operator:
    h._check(x)
    return Operator(h.data @ x.data + x.data @ h.data, x.space)


def dagger(x: Operator) -> Operator:
    return x.dag()


def frobenius_norm(x: Operator | np.ndarray) -> float:
    data = x.data if isinstance(x, Operator) else np.asarray(x)
    return float(np.linalg.norm(data))


def hermiticity_defect(x: Operator) -> float:
    return float(np.linalg.norm(x.data - x.data.conj().T))


@dataclass(frozen=True, eq=False)
class HermitianEigensystem:
    """Ascending eigenvalues with phase-fixed orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray
    space: TensorSpace | None = None

    def __len__(self):
        return len(self.values)

    def ket(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    def projector(self, i: int) -> Operator:
        v = self.vectors[:, i]
        return Operator(np.outer(v, v.conj()), self.space)

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T

    def from_diagonal(self, weights: Sequence[float]) -> Operator:
        """Operator ``sum_i w_i |v_i><v_i|``."""
        w = np.asarray(weights, dtype=float)
        return Operator((self.vectors * w) @ self.vectors.conj().T, self.space)

    def expectation_diagonal(self, x: Operator) -> np.ndarray:
        """Real parts of ``<v_i|x|v_i>``."""
        v = self.vectors
        return np.real(np.einsum("ji,jk,ki->i", v.conj(), x.data, v))


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real and non-negative."""
    v = np.array(vectors, dtype=complex)
    cols = np.arange(v.shape[1])
    idx = np.argmax(np.abs(v), axis=0)
    pivots = v[idx, cols]
    mag = np.abs(pivots)
    v = v * np.where(mag > 0, mag / np.where(mag > 0, pivots, 1), 1)
    v[idx, cols] = np.abs(v[idx, cols])
    return v


def hermitian_eig(a: Operator) -> HermitianEigensystem:
    norm = frobenius_norm(a)
    defect = hermiticity_defect(a)
    if defect > 1e-10 * norm:
        raise NonHermitianError(f"operator is not Hermitian: |A - A^dag|_F = {defect:.3e}")
    herm = 0.5 * (a.data + a.data.conj().T)
    values, vectors = np.linalg.eigh(herm)
    return HermitianEigensystem(values, fix_phases(vectors), a.space)


def embed_local(op: Operator, first_site: int, space: TensorSpace) -> Operator:
    """``I (x) ... (x) op (x) ... (x) I`` with ``op`` starting at ``first_site``."""
    k = op.space.n_factors
    if first_site < 0 or first_site + k > space.n_factors:
        raise ArgumentError(f"operator on {k} sites does not fit at site {first_site} of {space.n_factors}")
    if space.dims[first_site:first_site + k] != op.space.dims:
        raise ArgumentError("local operator dims do not match the target sites")
    left = int(np.prod(space.dims[:first_site], dtype=np.int64))
    right = int(np.prod(space.dims[first_site + k:], dtype=np.int64))
    data = np.kron(np.kron(np.eye(left), op.data), np.eye(right))
    return Operator(data, space)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (x + x.conj().T)


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho)
