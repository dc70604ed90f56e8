import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from zeno_lindblad.dyson import brute_force_effective_superoperator
from zeno_lindblad.errors import (ArgumentError, DecompositionError, DegenerateDarkStateError, LocalityError)
from zeno_lindblad.lindblad import dissipator_apply
from zeno_lindblad.operators import Operator, TensorSpace, random_hermitian
from zeno_lindblad.zeno import (TargetSpec, chain_full_model, coeffs_C, compose_two_boundary,
                                dissipator_spectrum_analytic, dissipator_spectrum_numeric,
                                effective_generator, hamiltonian_components_g, local_dissipator_matrix,
                                product_spectrum, projected_hamiltonian, reduce_single_boundary,
                                single_spin_dissipator, targeting_jumps, xyz_chain_hamiltonian)

J = (1.0, 2.2, 0.77)
angles = st.floats(0, np.pi)
phases = st.floats(0, 2 * np.pi)
mus = st.floats(-1, 1)
specs = st.builds(TargetSpec, angles, phases, mus)


def test_target_spec_rejects_mu_out_of_range():
    with pytest.raises(ArgumentError):
        TargetSpec(0, 0, 1.2)


def test_pure_target_along_z():
    l1, l2, psi0 = single_spin_dissipator(TargetSpec(0, 0, 1))
    assert np.allclose(psi0.data, np.diag([1, 0]))
    assert np.allclose(l2.data, 0)
    # pumps |1> into |0>, up to the phase convention of |0perp>
    assert np.allclose(np.abs(l1.data), [[0, 1], [0, 0]])


def test_unpolarised_target_is_maximally_mixed():
    assert np.allclose(single_spin_dissipator(TargetSpec(0.4, 2.0, 0.0))[2].data, np.eye(2) / 2)


@given(specs)
def test_dark_state_is_the_bloch_state(spec):
    l1, l2, psi0 = single_spin_dissipator(spec)
    assert np.allclose(psi0.data, oracles.target_density(spec.theta, spec.phi, spec.mu), atol=1e-14)
    out = dissipator_apply(l1, psi0).data + dissipator_apply(l2, psi0).data
    assert np.max(np.abs(out)) < 1e-13


@given(specs)
def test_analytic_spectrum_invariants(spec):
    s = dissipator_spectrum_analytic(spec)
    l0 = local_dissipator_matrix(targeting_jumps(spec))
    assert s.eigen_defect(l0) < 1e-12
    assert s.duality_defect() < 1e-12
    assert abs(np.trace(s.psi0) - 1) < 1e-14
    assert all(abs(np.trace(p)) < 1e-14 for p in s.psis[1:])
    assert np.allclose(s.phis[0], np.eye(2))
    assert np.allclose(s.xis, [0, -0.5, -0.5, -1])


@given(specs)
def test_numeric_spectrum_matches_analytic(spec):
    l0 = local_dissipator_matrix(targeting_jumps(spec))
    num = dissipator_spectrum_numeric(l0)
    ana = dissipator_spectrum_analytic(spec)
    assert np.allclose(np.sort_complex(num.xis), np.sort_complex(ana.xis), atol=1e-10)
    assert np.allclose(num.psi0, ana.psi0, atol=1e-10)
    assert num.duality_defect() < 1e-10
    assert num.eigen_defect(l0) < 1e-10
    assert np.all(num.xis.real <= 1e-12)
    # the -1/2 eigenspace is two dimensional, so compare the projector-like products
    # sum_k psi_k (x) phi_k over each eigenvalue, which is basis independent
    for xi in (-0.5, -1.0):
        def block(s):
            return sum(np.kron(p, f) for p, f, x in zip(s.psis, s.phis, s.xis) if abs(x - xi) < 1e-8)
        assert np.allclose(block(num), block(ana), atol=1e-9)


def test_numeric_spectrum_rejects_degenerate_kernel():
    with pytest.raises(DegenerateDarkStateError):
        dissipator_spectrum_numeric(np.zeros((4, 4)))


def test_numeric_spectrum_same_target_twice_is_accepted():
    spec = TargetSpec(0.3, 0.2, 0.6)
    l0 = 2 * local_dissipator_matrix(targeting_jumps(spec))
    s = dissipator_spectrum_numeric(l0)
    assert np.allclose(s.psi0, oracles.target_density(0.3, 0.2, 0.6))


@given(st.sampled_from([-0.3, 0.0, 0.5, 0.7, 0.9, 1.0]), angles, phases)
def test_C_is_diagonal_with_closed_form_entries(mu, theta, phi):
    C = coeffs_C(dissipator_spectrum_analytic(TargetSpec(theta, phi, mu)))
    want = np.diag([1, (1 + mu) / 2, (1 - mu) / 2, (1 - mu * mu) / 4])
    assert np.allclose(C, want, atol=1e-12)


@given(specs, specs)
def test_C_first_row_and_column_are_delta(a, b):
    C = coeffs_C(product_spectrum(dissipator_spectrum_analytic(a), dissipator_spectrum_analytic(b)))
    e = np.zeros(16)
    e[0] = 1
    assert np.allclose(C[0], e, atol=1e-12) and np.allclose(C[:, 0], e, atol=1e-12)


@given(specs)
def test_g_operators_match_closed_form(spec):
    h = xyz_chain_hamiltonian(2, *J)
    gs = hamiltonian_components_g(h, dissipator_spectrum_analytic(spec), (0,))
    g1, g3 = oracles.g1_g3(spec.theta, spec.phi, J)
    assert np.allclose(gs[1].data, g1, atol=1e-12)
    assert np.allclose(gs[2].data, g1.conj().T, atol=1e-12)
    assert np.allclose(gs[3].data, g3, atol=1e-12)


@given(specs, st.integers(2, 4))
def test_projected_hamiltonian_is_xyz_with_boundary_field(spec, n):
    h = xyz_chain_hamiltonian(n, *J)
    eff = reduce_single_boundary(h, spec)
    want = oracles.projected_chain(n - 1, J, left=(spec.theta, spec.phi, spec.mu))
    assert np.allclose(eff.h_d.data, want, atol=1e-12)


@given(specs, specs)
def test_two_boundary_projected_hamiltonian(left, right):
    h = xyz_chain_hamiltonian(4, *J)
    eff = compose_two_boundary(h, left, right)
    want = oracles.projected_chain(2, J, (left.theta, left.phi, left.mu), (right.theta, right.phi, right.mu))
    assert np.allclose(eff.h_d.data, want, atol=1e-12)


@given(specs)
def test_single_boundary_effective_dissipator_closed_form(spec):
    eff = reduce_single_boundary(xyz_chain_hamiltonian(3, *J), spec)
    g1, g3 = oracles.g1_g3(spec.theta, spec.phi, J)
    eye = np.eye(2)
    want = oracles.boundary_dissipator(np.kron(g1, eye), np.kron(g3, eye), spec.mu)
    assert np.allclose(eff.superoperator(), want, atol=1e-11)
    assert eff.h_a_norm < 1e-10


@given(specs, specs)
def test_two_boundary_dissipator_splits(left, right):
    eff = compose_two_boundary(xyz_chain_hamiltonian(4, *J), left, right)
    eye = np.eye(2)
    gl1, gl3 = oracles.g1_g3(left.theta, left.phi, J)
    gr1, gr3 = oracles.g1_g3(right.theta, right.phi, J)
    want = (oracles.boundary_dissipator(np.kron(gl1, eye), np.kron(gl3, eye), left.mu)
            + oracles.boundary_dissipator(np.kron(eye, gr1), np.kron(eye, gr3), right.mu))
    assert np.allclose(eff.superoperator(), want, atol=1e-10)
    assert eff.h_a_norm < 1e-10


@given(st.integers(0, 2**32 - 1))
def test_A_psd_B_hermitian_and_canonical_form(seed):
    rng = np.random.default_rng(seed)
    spec = TargetSpec(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi), rng.uniform(-1, 1))
    h = Operator(random_hermitian(8, rng), TensorSpace((2, 2, 2)))
    eff = reduce_single_boundary(h, spec)
    A, B = eff.a_matrix, eff.b_matrix
    assert np.allclose(A, A.conj().T) and np.allclose(B, B.conj().T)
    assert np.linalg.eigvalsh(A)[0] >= -1e-12
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    canon = sum(a * op.data @ x @ op.data.conj().T for op, a in eff.canonical_jumps)
    direct = sum(A[m, n] * eff.g_ops[n].data @ x @ eff.g_ops[m].data.conj().T
                 for m in range(len(eff.g_ops)) for n in range(len(eff.g_ops)))
    assert np.allclose(canon, direct, atol=1e-12 * max(1, np.abs(direct).max()))
    assert all(a >= 0 for _, a in eff.canonical_jumps)


def test_effective_generator_rejects_non_negative_xi():
    g = [Operator(np.eye(2), (2,))] * 2
    with pytest.raises(Exception):
        effective_generator(np.eye(2), np.array([0, 0.1]), g)


def test_pure_targets_give_one_rate_four_jump_per_boundary():
    spec_l, spec_r = TargetSpec(0.4, 0.1, 1.0), TargetSpec(1.1, 2.0, 1.0)
    eff = compose_two_boundary(xyz_chain_hamiltonian(4, *J), spec_l, spec_r)
    rates = sorted(r for _, r in eff.canonical_jumps)
    assert len(rates) == 2 and np.allclose(rates, [4, 4])


def test_locality_violation_detected():
    h = xyz_chain_hamiltonian(3, *J).data
    zz = np.kron(np.kron(oracles.SZ, np.eye(2)), oracles.SZ)
    with pytest.raises(LocalityError):
        compose_two_boundary(Operator(h + zz, (2, 2, 2)), TargetSpec(), TargetSpec(1, 1, 0.5))


def test_compose_requires_three_sites():
    with pytest.raises(ArgumentError):
        compose_two_boundary(xyz_chain_hamiltonian(2, *J), TargetSpec(), TargetSpec())


def test_decomposition_checks_dims():
    with pytest.raises(ArgumentError):
        hamiltonian_components_g(Operator(np.eye(6), (3, 2)), dissipator_spectrum_analytic(TargetSpec()), (0,))


def test_projected_hamiltonian_validates_dark_state():
    h = xyz_chain_hamiltonian(2, *J)
    with pytest.raises(ArgumentError):
        projected_hamiltonian(h, np.diag([1.0, 1.0]), (0,))


def test_embed_and_trace_out_are_inverse():
    rng = np.random.default_rng(5)
    eff = compose_two_boundary(xyz_chain_hamiltonian(4, *J), TargetSpec(0.3, 0.2, 0.9), TargetSpec(1, 2, 0.7))
    r = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(eff.trace_out(eff.embed(r)).data, r)
    want = np.kron(np.kron(eff.psi0.data[:2, :2] * 0 + oracles.target_density(0.3, 0.2, 0.9), r),
                   oracles.target_density(1, 2, 0.7))
    assert np.allclose(eff.embed(r).data, want)


@given(specs, st.floats(0.5, 500))
def test_generator_is_gamma_independent_and_to_lindblad_rescales(spec, gamma):
    h = xyz_chain_hamiltonian(3, *J)
    eff = reduce_single_boundary(h, spec, gamma=gamma)
    assert np.allclose(eff.superoperator(), reduce_single_boundary(h, spec).superoperator())
    lme = eff.to_lindblad()
    assert np.isclose(lme.gamma, 1 / gamma)
    assert np.allclose(lme.hamiltonian.data, eff.h_d.data + eff.h_a.data / gamma)


def test_brute_force_matches_on_single_boundary_chain():
    spec = TargetSpec(np.pi / 3, np.pi / 4, 0.9)
    h = xyz_chain_hamiltonian(3, *J)
    eff = reduce_single_boundary(h, spec)
    brute = brute_force_effective_superoperator(chain_full_model(h, spec, None, 1.0))
    assert np.max(np.abs(brute - eff.superoperator())) < 1e-10


def test_reconstruction_failure_is_reported():
    spec = dissipator_spectrum_analytic(TargetSpec(0.5, 0.5, 0.5))
    broken = type(spec)(spec.psis, spec.xis, spec.phis * 0.5, spec.dims)
    with pytest.raises(DecompositionError):
        hamiltonian_components_g(xyz_chain_hamiltonian(2, *J), broken, (0,))
