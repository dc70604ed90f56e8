import numpy as np
import pytest
from hypothesis import given, strategies as st

from zeno_lindblad.errors import ArgumentError, NonHermitianError
from zeno_lindblad.operators import (Operator, TensorSpace, embed_local, fix_phases, hermitian_eig, kron,
                                     partial_trace, place, random_density, random_hermitian, reorder,
                                     SIGMA_X, SIGMA_Y, SIGMA_Z)

seeds = st.integers(0, 2**32 - 1)


def rand_op(rng, dims):
    d = int(np.prod(dims))
    return Operator(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)), TensorSpace(tuple(dims)))


def test_tensor_space_rejects_bad_inputs():
    with pytest.raises(ArgumentError):
        TensorSpace((2, 1))
    with pytest.raises(ArgumentError):
        TensorSpace((2, 2), frozenset({0, 1}))
    with pytest.raises(ArgumentError):
        TensorSpace((2, 2), frozenset({5}))
    s = TensorSpace.qubits(4, (0, 3))
    assert s.dim == 16 and s.free == (1, 2) and s.d0 == 4 and s.d1 == 4


def test_operator_is_read_only_and_checks_spaces():
    a = Operator(np.eye(2), (2,))
    with pytest.raises(ValueError):
        a.data[0, 0] = 3
    with pytest.raises(ArgumentError):
        a + Operator(np.eye(4), (2, 2))
    with pytest.raises(ArgumentError):
        Operator(np.eye(3), (2,))


def test_pauli_algebra():
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        assert np.allclose(s @ s, np.eye(2))
    assert np.allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)


@given(seeds)
def test_partial_trace_of_product_is_scaled_factor(seed):
    rng = np.random.default_rng(seed)
    a, b, c = rand_op(rng, (2,)), rand_op(rng, (3,)), rand_op(rng, (2,))
    x = kron(a, b, c)
    r = partial_trace(x, [0, 2])
    assert np.allclose(r.data, a.tr() * c.tr() * b.data)
    assert np.allclose(partial_trace(x, [1]).data, b.tr() * np.kron(a.data, c.data))


@given(seeds)
def test_partial_trace_composes_and_preserves_trace(seed):
    rng = np.random.default_rng(seed)
    x = rand_op(rng, (2, 2, 3))
    whole = partial_trace(x, [0, 1, 2]).data[0, 0]
    assert np.isclose(whole, x.tr())
    assert np.allclose(partial_trace(partial_trace(x, [2]), [0]).data, partial_trace(x, [0, 2]).data)


@given(seeds)
def test_place_matches_explicit_kron_for_boundary_sites(seed):
    rng = np.random.default_rng(seed)
    space = TensorSpace((2, 2, 2, 2), frozenset({0, 3}))
    aL, aR, b = rand_op(rng, (2,)), rand_op(rng, (2,)), rand_op(rng, (2, 2))
    a = Operator(np.kron(aL.data, aR.data), (2, 2))
    got = place(a, b, (0, 3), space)
    want = np.kron(np.kron(aL.data, b.data), aR.data)
    assert np.allclose(got.data, want)
    # tracing the placed factors gives back b scaled by tr a
    assert np.allclose(partial_trace(got, (0, 3)).data, a.tr() * b.data)


@given(seeds, st.permutations([0, 1, 2]))
def test_reorder_roundtrip(seed, perm):
    rng = np.random.default_rng(seed)
    x = rand_op(rng, (2, 3, 2))
    y = reorder(x, perm)
    inv = [perm.index(k) for k in range(3)]
    assert np.allclose(reorder(y, inv).data, x.data)
    assert y.space.dims == tuple((2, 3, 2)[p] for p in perm)


def test_embed_local():
    space = TensorSpace.qubits(3)
    op = Operator(SIGMA_X, (2,))
    assert np.allclose(embed_local(op, 1, space).data, np.kron(np.kron(np.eye(2), SIGMA_X), np.eye(2)))
    with pytest.raises(ArgumentError):
        embed_local(Operator(np.eye(4), (2, 2)), 2, space)


@given(seeds, st.integers(1, 8))
def test_hermitian_eig_reconstructs_with_fixed_phases(seed, d):
    rng = np.random.default_rng(seed)
    a = Operator(random_hermitian(d, rng), (d,) if d > 1 else None)
    es = hermitian_eig(a)
    assert np.allclose(es.reconstruct(), a.data, atol=1e-12)
    assert np.all(np.diff(es.values) >= 0)
    v = es.vectors
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-12)
    piv = v[np.argmax(np.abs(v), axis=0), np.arange(d)]
    assert np.all(np.abs(piv.imag) < 1e-15) and np.all(piv.real > 0)


def test_fix_phases_is_idempotent_and_phase_invariant():
    rng = np.random.default_rng(3)
    v, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    f = fix_phases(v)
    assert np.allclose(fix_phases(f), f)
    assert np.allclose(fix_phases(v * np.exp(1j * rng.uniform(0, 6, 4))), f)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        hermitian_eig(Operator(np.array([[0, 1], [0, 0]]), (2,)))


@given(seeds, st.integers(2, 6))
def test_random_density_is_a_state(seed, d):
    rho = random_density(d, np.random.default_rng(seed))
    assert np.isclose(np.trace(rho), 1)
    assert np.allclose(rho, rho.conj().T)
    assert np.linalg.eigvalsh(rho)[0] > -1e-12
