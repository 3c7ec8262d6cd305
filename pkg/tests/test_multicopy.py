import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiralent import moments, multicopy as mc, qstate
from chiralent.errors import DimensionError, ParameterError, SizeGuardError


def test_site_permutation_is_unitary_and_composes():
    P = mc.site_permutation([1, 2, 0], [2, 2, 2])
    assert np.allclose(P @ P.T, np.eye(8))
    assert np.allclose(np.linalg.matrix_power(P, 3), np.eye(8))
    with pytest.raises(ParameterError):
        mc.site_permutation([0, 0, 1], [2, 2, 2])
    with pytest.raises(DimensionError):
        mc.site_permutation([1, 0], [2, 3])


def test_copy_cycle_inverse():
    for k in (2, 3, 4):
        a, b = mc.copy_cycle(k), mc.copy_cycle(k, inverse=True)
        assert np.allclose(a @ b, np.eye(2 ** k))


def test_swap_op_matches_permutation():
    assert np.allclose(mc.swap_op(2, 0, 1), mc.site_permutation([1, 0], [2, 2]))


def test_pauli_commutator_gives_chirality():
    n = 3
    g12, g23 = mc.g_op(n, 0, 1), mc.g_op(n, 1, 2)
    chi = mc.chi_op(n, 0, 1, 2)
    assert np.linalg.norm(g12 @ g23 - g23 @ g12 + 16j * chi) < 1e-12
    p12, p23 = mc.singlet_proj(n, 0, 1), mc.singlet_proj(n, 1, 2)
    assert np.linalg.norm(p12 @ p23 - p23 @ p12 + 1j * chi) < 1e-12


def test_chirality_is_hermitian_and_antisymmetric():
    chi = mc.chi_op(3, 0, 1, 2)
    assert np.allclose(chi, chi.conj().T)
    assert np.allclose(mc.chi_op(3, 1, 0, 2), -chi)
    with pytest.raises(ParameterError):
        mc.chi_op(3, 0, 0, 1)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_delta_equals_four_i_omega(k):
    assert mc.verify_delta_omega(k) < 1e-12


def test_four_copy_cancellation():
    assert mc.cancellation_residual() < 1e-12


def test_size_guard():
    with pytest.raises(SizeGuardError):
        mc.build_operator("Cycle", 5)
    with pytest.raises(SizeGuardError):
        mc.tensor_power(qstate.make_horodecki(0.5), 3)


def test_build_operator_tags():
    op = mc.build_operator("Chi", 3, (0, 1, 2))
    assert op.n_qubits == 3 and np.allclose(op.data, mc.chi_op(3, 0, 1, 2))
    with pytest.raises(ParameterError):
        mc.build_operator("Swap", 3, (0, 3))


@pytest.mark.parametrize("dims", [(2, 2), (2, 3)])
def test_permutation_traces_give_moments(dims):
    rho, _ = qstate.sample_state("RandomHaar", dims, 9)
    ms = moments.compute_moments(rho, 3)
    for k in (1, 2, 3):
        assert mc.permutation_trace(rho, k, "Mu") == pytest.approx(ms.mu_k(k), abs=1e-12)
        assert mc.permutation_trace(rho, k, "I") == pytest.approx(ms.i_k(k), abs=1e-12)


def test_bell_three_routes():
    rho = qstate.make_bell()
    for k in (3, 4):
        assert mc.correlator_ck(rho, k) == pytest.approx(-0.75, abs=1e-12)
        assert mc.delta_route_ck(rho, k) == pytest.approx(-0.75, abs=1e-12)


def test_oracle_rejects_qutrits():
    with pytest.raises(DimensionError):
        mc.correlator_ck(qstate.make_param_pure(0.3, (2, 3)), 3)


def test_hadamard_test_statistics():
    rho = qstate.make_werner(0.5)
    op = mc.bipartite_cycle(2, (2, 2), True, False)
    copies = mc.tensor_power(rho, 2)
    res = mc.hadamard_test(op, copies, 200_000, 3)
    exact = moments.compute_moments(rho, 2).mu_k(2)
    assert res.p0 == pytest.approx((1 + exact) / 2)
    assert abs(res.estimate - exact) < 5 * res.stderr


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([3, 4]))
def test_three_route_chirality_agreement(seed, k):
    rho, _ = qstate.sample_state("RandomHaar", (2, 2), seed)
    a = moments.chirality(rho, k)
    assert mc.correlator_ck(rho, k) == pytest.approx(a, abs=1e-9)
    assert mc.delta_route_ck(rho, k) == pytest.approx(a, abs=1e-9)
