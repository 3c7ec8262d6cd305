import json
import warnings

import numpy as np
import pytest

from chiralent import certify, qstate
from chiralent.certify import Budget
from chiralent.errors import ParameterError

FAST = Budget(restarts=4, steps_per_phase=(300, 300, 300))


def test_loss_gradient_matches_finite_differences():
    rho = qstate.make_tiles(0.0).data
    assert certify.finite_difference_check(rho, (3, 3), K=3) < 1e-5
    rho2, _ = qstate.sample_state("RandomHaar", (2, 3), 1)
    assert certify.finite_difference_check(rho2.data, (2, 3), K=2, rng_seed=3) < 1e-5


def test_budget_validation():
    with pytest.raises(ParameterError):
        Budget(restarts=0)
    with pytest.raises(ParameterError):
        Budget(steps_per_phase=(10, 10), learning_rates=(0.1,))


def test_separable_state_fits_to_zero():
    rho, _ = qstate.sample_state("RandomSeparable", (2, 2), 4, K=3)
    dec = certify.caratheodory_fit(rho, 6, FAST)
    assert dec.d_f < 1e-4
    assert np.linalg.norm(dec.matrix() - rho.data) == pytest.approx(dec.d_f, abs=1e-12)
    assert dec.weights.sum() == pytest.approx(1.0)


def test_entangled_state_has_positive_distance():
    dec = certify.caratheodory_fit(qstate.make_bell(), 8, FAST)
    # the closest separable state to a Bell state sits at Frobenius distance 1/√3
    assert dec.d_f == pytest.approx(1 / np.sqrt(3), abs=2e-3)


def test_path_is_non_increasing():
    path = certify.caratheodory_path(qstate.make_tiles(0.0), [4, 8, 12], FAST)
    d = [p.d_f for p in path]
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))


def test_range_projector():
    P = certify.range_projector(qstate.make_tiles(0.0))
    assert np.allclose(P @ P, P) and np.trace(P).real == pytest.approx(4.0)


def test_gap_zero_for_product_range():
    rho = qstate.make_classical_correlated(3)
    assert certify.pv_gap_direct(rho).gap < 1e-12


def test_tiles_gap_positive_and_routes_agree():
    rho = qstate.make_tiles(0.0)
    a = certify.pv_gap_direct(rho)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        b = certify.pv_gap_vandermonde(rho)
    assert a.gap > 1e-3
    assert b.gap == pytest.approx(a.gap, abs=1e-8)
    assert np.ptp(np.sort(a.restart_gaps)[:4]) < 1e-8


def test_vandermonde_gap_on_known_overlaps():
    lam = np.array([0.5, 0.3, 0.2])
    p = np.array([0.2, 0.3, 0.4])
    mom = [float(np.sum(p * lam ** k)) for k in range(1, 4)]
    gap, kappa = certify.vandermonde_gap(lam, mom)
    assert gap == pytest.approx(0.1, abs=1e-12) and kappa > 1
    with pytest.raises(ParameterError):
        certify.vandermonde_gap(lam, mom[:2])


def test_augmented_moment_definition():
    rho = qstate.make_horodecki(0.4)
    a = np.array([1, 0, 0], dtype=complex)
    b = np.array([0, 1, 0], dtype=complex)
    v = np.kron(a, b)
    assert certify.augmented_moment(rho, a, b, 2) == pytest.approx((v.conj() @ rho.data @ rho.data @ v).real)


def test_distinct_eigenvalues_merge_degenerate():
    vals, sep = certify.distinct_nonzero_eigenvalues(qstate.make_tiles(0.0))
    assert np.allclose(vals, [0.25]) and np.isinf(sep)


def test_verdict_rules():
    assert certify.verdict(-0.1, 0.5, 0.5) == "NPT"
    assert certify.verdict(0.0, 1e-5, 0.0) == "SEP"
    assert certify.verdict(0.0, 0.04, 0.03) == "BE-candidate"


def test_certify_report_json():
    rep = certify.certify(qstate.make_tiles(0.0), "tiles", K=10, budget=FAST)
    d = json.loads(rep.to_json())
    assert d["verdict"] == "BE-candidate" and d["K"] == 10
    assert rep.gap_vandermonde == pytest.approx(rep.gap_direct, abs=1e-8)
