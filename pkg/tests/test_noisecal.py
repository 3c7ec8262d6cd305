import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chiralent import moments, noisecal, qstate
from chiralent.errors import IdentifiabilityError, ParameterError


def test_depolarize_bounds():
    rho = qstate.make_bell()
    assert np.allclose(noisecal.depolarize(rho, 1.0).data, np.eye(4) / 4)
    with pytest.raises(ParameterError):
        noisecal.depolarize(rho, -0.1)


def test_sample_expectation_seeded_and_unbiased():
    a = noisecal.sample_expectation(0.3, 10_000, 5)
    b = noisecal.sample_expectation(0.3, 10_000, 5)
    assert a == b and a.seed == 5
    rng = np.random.default_rng(0)
    est = [noisecal.sample_expectation(0.3, 1000, rng).estimate for _ in range(2000)]
    assert np.mean(est) == pytest.approx(0.3, abs=3e-3)
    assert np.std(est) == pytest.approx(math.sqrt((1 - 0.09) / 1000), rel=0.05)
    with pytest.raises(ParameterError):
        noisecal.sample_expectation(1.5, 10, 0)


def test_rmse_vanishes_without_noise_and_is_linear():
    fit = noisecal.rmse_study((2, 2), eta_grid=np.linspace(0, 0.2, 5), n_states=2000, n_boot=50)
    assert fit.rmse[0] == 0.0
    assert fit.r2 > 0.99
    assert fit.ci[0] < fit.slope < fit.ci[1]
    with pytest.raises(ParameterError):
        noisecal.rmse_study(n_states=10)


def test_depolarized_separable_never_npt():
    assert noisecal.separable_false_positives(500, (2, 3)) == 0


def test_bootstrap_error_of_mean():
    rng = np.random.default_rng(1)
    x = rng.choice([-1.0, 1.0], 4000)
    err = noisecal.bootstrap_errors(x, B=400)
    assert err == pytest.approx(x.std() / math.sqrt(x.size), rel=0.15)
    with pytest.raises(ParameterError):
        noisecal.bootstrap_errors(x, B=10)


def test_two_stage_noiseless_recovery():
    th = np.radians([0, 20, 45, 70, 90])
    data = [{k: noisecal.NoisySample(v, 1, v, 1e-3) for k, v in
             zip(noisecal.MOMENT_ORDERS, [noisecal.TORINO_2X2_F[k] * m for k, m in
                                          zip(noisecal.MOMENT_ORDERS, noisecal._theory_moments(t))])}
            for t in th]
    fit = noisecal.two_stage_mle(data, [th[0], None, th[2], None, th[4]])
    for k in noisecal.MOMENT_ORDERS:
        assert fit.degradation[f"f{k}"] == pytest.approx(noisecal.TORINO_2X2_F[k], abs=1e-12)
    assert np.allclose(fit.theta_estimates, th, atol=1e-6)
    json.loads(fit.to_json())


def test_two_stage_needs_two_angles():
    data = noisecal.simulate_moment_measurements([0.2, 0.4], shots=1000)
    with pytest.raises(IdentifiabilityError):
        noisecal.two_stage_mle(data, [0.3, 0.3])
    with pytest.raises(IdentifiabilityError):
        noisecal.two_stage_mle(data, [0.3, None])


def test_negativity_bootstrap_routes():
    ng = noisecal.negativity_bootstrap(np.pi / 4, B=200)
    th = noisecal.negativity_bootstrap(np.pi / 4, B=200, route="theta")
    assert 0.002 < ng < 0.012 and 0 < th < ng
    with pytest.raises(ParameterError):
        noisecal.negativity_bootstrap(0.3, route="bogus")


def test_calibration_states_theory():
    th = noisecal.calibration_theory()
    assert th["product"] == pytest.approx({"S1": 1.0, "G1": 1.0, "S2": 1.0, "G2": 1.0})
    assert th["misaligned"]["G1"] == pytest.approx(0.5)
    assert th["misaligned"]["G2"] == pytest.approx(0.25)
    assert th["classical"]["S1"] == pytest.approx(1.0)


def test_per_circuit_noiseless_recovery():
    truth = {"tiles": noisecal.feature_values(qstate.make_tiles(0.0))}
    zero = {k: 0.0 for k in noisecal.FEATURES}
    cal = noisecal.simulate_raw_features(noisecal.calibration_theory(), sigmas=zero, rng=0)
    test = noisecal.simulate_raw_features(truth, sigmas=zero, rng=1)
    fit = noisecal.per_circuit_mle(cal, test, with_errors=False)
    for name, g in noisecal.FEZ_FIDELITIES.items():
        assert fit.degradation[name] == pytest.approx(g, abs=1e-7)
    for x in noisecal.FEATURES:
        assert fit.physical_features["tiles"][x] == pytest.approx(truth["tiles"][x], abs=1e-6)


def test_per_circuit_errors_and_restarts():
    rng = np.random.default_rng(3)
    truth = {"c1": noisecal.feature_values(qstate.make_chessboard(*noisecal.CHESS_C1))}
    cal = noisecal.simulate_raw_features(noisecal.calibration_theory(), repeats=4, rng=rng)
    test = noisecal.simulate_raw_features(truth, repeats=4, rng=rng)
    fit = noisecal.per_circuit_mle(cal, test, restarts=3)
    nlls = fit.extras["restart_nlls"]
    assert max(nlls) - min(nlls) < 1e-8
    for name in noisecal.FIDELITIES:
        assert 0 < fit.errors[name] < 0.05
    assert math.isfinite(fit.errors["c1"]["D2"])


def test_raw_csv_round_trip(tmp_path):
    raw = {"s": {"S1": [0.5, -0.25], "G1": [0.125]}}
    path = tmp_path / "raw.csv"
    noisecal.write_raw_csv(path, raw)
    assert noisecal.read_raw_csv(path) == raw


def test_werner_asymmetric_endpoints_and_offset():
    for p in (0.0, 1.0):
        w = noisecal.werner_asymmetric(p)
        assert w.calibrated == pytest.approx(w.theory, abs=1e-14)
    w = noisecal.werner_asymmetric(0.2)
    assert w.calibrated / w.theory - 1 == pytest.approx(0.023, abs=1e-3)
    assert w.stderr > 0
    with pytest.raises(ParameterError):
        noisecal.werner_asymmetric(0.5, f_mu4=0.0)


def test_sweep_small_run():
    fams = {"c1": qstate.make_chessboard(*noisecal.CHESS_C1), "sep": qstate.make_classical_correlated(3)}
    rows = noisecal.noise_model_sweep(fams, n_trials=50, rng_seed=2)
    rates = {r.name: r.rate for r in rows}
    assert rates["c1"] > 0.9
    assert rows[1].d2_theory == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ParameterError):
        noisecal.noise_model_sweep(fams, n_trials=10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, math.pi / 2), st.floats(0.3, 1.0), st.floats(0.3, 1.0), st.floats(0.3, 1.0))
def test_fit_c_exact_on_clean_data(theta, f2, f3, f4):
    f = np.array([f2, f3, f4])
    m = f * noisecal._theory_moments(theta)
    c = noisecal._fit_c(m, f, np.ones(3))
    assert c == pytest.approx(math.cos(theta) ** 2, abs=1e-7)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.25), st.integers(0, 2 ** 31))
def test_negativity_monotone_under_depolarizing(eta, seed):
    rho, _ = qstate.sample_state("RandomHaar", (2, 2), seed)
    assert moments.negativity(noisecal.depolarize(rho, eta)).negativity <= moments.negativity(rho).negativity + 1e-12
