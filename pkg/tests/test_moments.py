import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiralent import moments, qstate, spectral
from chiralent.errors import DomainError, InconsistentMomentsError, ParameterError


def _eig_moment(M, k):
    return float(np.sum(np.linalg.eigvalsh(M) ** k))


def test_moments_match_eigenvalue_powers():
    rho, _ = qstate.sample_state("RandomHaar", (2, 3), 11)
    ms = moments.compute_moments(rho, 6)
    pt = spectral.partial_transpose(rho)
    for k in range(1, 7):
        assert ms.mu_k(k) == pytest.approx(_eig_moment(pt, k), abs=1e-13)
        assert ms.i_k(k) == pytest.approx(_eig_moment(rho.data, k), abs=1e-13)
    with pytest.raises(ParameterError):
        moments.compute_moments(rho, 1)


def test_bell_chirality():
    rho = qstate.make_bell()
    assert moments.chirality(rho, 2) == pytest.approx(0.0, abs=1e-15)
    assert moments.chirality(rho, 3) == pytest.approx(-0.75, abs=1e-14)
    assert moments.chirality(rho, 4) == pytest.approx(-0.75, abs=1e-14)


def test_werner_closed_form_matches_numerics():
    for p in np.linspace(0, 1, 7):
        rho = qstate.make_werner(float(p))
        ref = moments.werner_closed_form(float(p))
        ms = moments.compute_moments(rho, 4)
        assert ms.i_k(2) == pytest.approx(ref["I2"], abs=1e-14)
        assert ms.i_k(4) == pytest.approx(ref["I4"], abs=1e-14)
        assert ms.mu_k(4) == pytest.approx(ref["mu4"], abs=1e-14)
        assert ms.c_k(4) == pytest.approx(ref["C4"], abs=1e-14)
        assert moments.negativity(rho).negativity == pytest.approx(ref["negativity"], abs=1e-14)


def test_pure_theta_moments_match_numerics():
    for th in np.linspace(0, np.pi, 9):
        ref = moments.pure_theta_moments(float(th))
        ms = moments.compute_moments(qstate.make_param_pure(float(th)), 4)
        for k in (2, 3, 4):
            assert ms.mu_k(k) == pytest.approx(ref[f"mu{k}"], abs=1e-14)


def test_negativity_relations_invert():
    for N in np.linspace(0, 0.5, 11):
        c4 = moments.c4_from_negativity(float(N))
        assert moments.negativity_from_c4(c4) == pytest.approx(N, abs=1e-7)
    assert moments.c3_from_negativity(0.5) == pytest.approx(-0.75)
    with pytest.raises(DomainError):
        moments.c4_from_negativity(0.6)
    with pytest.raises(DomainError):
        moments.negativity_from_c4(0.1)


def test_mub_extremal_bounds_exact():
    for sign, s in (("+", 1), ("-", -1)):
        rho = qstate.make_mub_extremal(sign)
        assert moments.chirality(rho, 3) == pytest.approx(s / 36, abs=1e-12)
        assert moments.chirality(rho, 4) == pytest.approx(s / 27, abs=1e-12)


def test_realign_moments_on_product_state():
    # R(a⊗b) = vec(a)vec(b)ᵀ, so G_1 = Tr[a bᵀ] and the gap closes only for equal real marginals
    same = moments.compute_realign_moments(qstate.make_product([1, 0, 0], [1, 0, 0]))
    assert np.allclose(same.sigma, 1.0)
    assert np.allclose(same.d_gap, 0.0, atol=1e-14)
    crossed = moments.compute_realign_moments(qstate.make_product([1, 0, 0], [0, 1, 0]))
    assert np.allclose(crossed.sigma, 1.0)
    assert np.allclose(crossed.g, 0.0, atol=1e-14)


def test_realign_moments_for_unequal_dims_leave_g_undefined():
    rm = moments.compute_realign_moments(qstate.make_param_pure(0.7, (2, 3)))
    assert np.all(np.isnan(rm.g))
    assert np.all(np.isfinite(rm.sigma))


def test_horodecki_odd_delta_g():
    rho = qstate.make_horodecki(0.5)
    rminus = spectral.sector_decompose(rho).r_minus
    tr3 = float(np.trace(np.linalg.matrix_power(rminus, 3)))
    assert moments.delta_g(rho, 3) == pytest.approx(6.0e-3, abs=3e-4)
    assert moments.delta_g(rho, 3) == pytest.approx(2 * tr3, abs=1e-12)
    assert moments.delta_g(rho, 2) == pytest.approx(0.0, abs=1e-14)


def test_chessboard_has_no_antisymmetric_sector():
    rho = qstate.make_chessboard(1, 1, 2, 1, 1, 3)
    assert np.linalg.norm(spectral.sector_decompose(rho).r_minus) < 1e-10
    assert moments.chirality(rho, 3) == pytest.approx(0.0, abs=1e-14)
    for k in (2, 3, 4, 5):
        assert moments.delta_g(rho, k) == pytest.approx(0.0, abs=1e-12)


def test_quartic_roots_against_numpy():
    lam = np.array([0.6, 0.3, 0.2, -0.1])
    e = moments.newton_girard_coefficients([np.sum(lam ** k) for k in range(1, 5)])
    assert np.allclose(np.sort(moments.quartic_roots(e).real), np.sort(lam), atol=1e-10)


def test_spectrum_from_power_sums_routes_agree():
    lam = np.array([0.55, 0.3, 0.25, -0.1])
    p = np.array([np.sum(lam ** k) for k in range(1, 5)])
    a = moments.spectrum_from_power_sums(p, "ferrari")
    b = moments.spectrum_from_power_sums(p, "durand_kerner")
    assert np.allclose(a, np.sort(lam)[::-1]) and np.allclose(a, b)
    with pytest.raises(ParameterError):
        moments.spectrum_from_power_sums(p[:3], "ferrari")


def test_inconsistent_moments_raise():
    # μ_2 > 1 with μ_1 = 1 on four levels and nonsense higher moments
    with pytest.raises(InconsistentMomentsError):
        moments.spectrum_from_power_sums([1.0, 0.2, 0.9, -0.5])


def test_negativity_routes_on_degenerate_spectrum():
    rho = qstate.make_werner(0.8)  # PT spectrum has a triple eigenvalue
    a = moments.negativity(rho, "Direct").negativity
    b = moments.negativity(rho, "NewtonGirard").negativity
    assert a == pytest.approx((3 * 0.8 - 1) / 4, abs=1e-12)
    assert b == pytest.approx(a, abs=1e-6)


def test_c4_dett_relation_for_bell_diagonal():
    rho = qstate.make_werner(0.6)
    assert moments.c4_dett_residual(rho) == pytest.approx(0.0, abs=1e-14)


def test_bell_product_residual_maximum():
    ps = np.linspace(0, 1, 101)
    for variant in ("psi_minus", "phi_plus"):
        res = [abs(moments.c4_dett_residual(qstate.make_bell_product_mix(float(p), variant))) for p in ps]
        assert max(res) == pytest.approx(1 / 64, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([(2, 2), (2, 3), (3, 3)]))
def test_second_moment_is_invariant(seed, dims):
    rho, _ = qstate.sample_state("RandomHaar", dims, seed)
    ms = moments.compute_moments(rho, 2)
    assert ms.mu_k(2) == pytest.approx(ms.i_k(2), abs=1e-12)
    assert ms.mu_k(1) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(1, 8))
def test_separable_chirality_bounds(seed, K):
    rho, _ = qstate.sample_state("RandomSeparable", (2, 2), seed, K=K)
    assert abs(moments.chirality(rho, 3)) <= moments.SEPARABLE_C3_BOUND + 1e-9
    assert abs(moments.chirality(rho, 4)) <= moments.SEPARABLE_C4_BOUND + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, math.pi))
def test_pure_state_c4_negativity_relation(theta):
    rho = qstate.make_param_pure(theta)
    n = moments.negativity(rho).negativity
    assert moments.chirality(rho, 4) == pytest.approx(moments.c4_from_negativity(min(n, 0.5)), abs=1e-9)
