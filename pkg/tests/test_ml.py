import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import roc_auc_score

from chiralent.errors import SchemaMismatchError, StratificationError
from chiralent.ml import (
    ClassifierModel,
    LogRegEN,
    RandomForest,
    auc,
    balanced_weights,
    best_split,
    check_feature_names,
    confusion,
    cv_zero_fp,
    evaluate,
    roc_curve,
    stratified_folds,
    train_logreg_en,
    train_random_forest,
    zero_fp_threshold,
)
from chiralent.ml.logreg import objective


def _blobs(n=200, p=4, shift=1.5, seed=0):
    rng = np.random.default_rng(seed)
    y = np.r_[np.zeros(n // 2), np.ones(n - n // 2)].astype(int)
    X = rng.standard_normal((n, p))
    X[y == 1, 0] += shift
    return X, y


def test_roc_and_auc_against_sklearn():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 300)
    s = np.round(rng.random(300) + 0.3 * y, 2)  # ties exercise the step handling
    assert auc(y, s) == pytest.approx(roc_auc_score(y, s), abs=1e-12)
    fpr, tpr, thr = roc_curve(y, s)
    assert fpr[0] == tpr[0] == 0.0 and fpr[-1] == tpr[-1] == 1.0 and np.isinf(thr[0])


def test_confusion_counts():
    c = confusion([0, 0, 1, 1], [0.2, 0.7, 0.4, 0.9])
    assert c == {"tp": 1, "fp": 1, "tn": 1, "fn": 1}


def test_balanced_weights_equalize_classes():
    y = np.array([0, 0, 0, 1])
    w = balanced_weights(y)
    assert w[y == 0].sum() == pytest.approx(w[y == 1].sum())


def test_best_split_finds_separating_threshold():
    X = np.array([[0.1], [0.2], [0.8], [0.9]])
    y = np.array([0, 0, 1, 1], dtype=float)
    feat, thr, _ = best_split(X, y, np.ones(4), [0])
    assert feat == 0 and 0.2 <= thr < 0.8


def test_forest_separates_and_round_trips():
    X, y = _blobs(shift=4.0)
    rf = RandomForest(n_trees=25, rng_seed=1).fit(X, y)
    assert auc(y, rf.predict_proba(X)) > 0.99
    clone = RandomForest.from_dict(json.loads(json.dumps(rf.to_dict())))
    assert np.array_equal(clone.predict_proba(X), rf.predict_proba(X))


def test_forest_is_seeded():
    X, y = _blobs()
    a = RandomForest(n_trees=10, rng_seed=5).fit(X, y).predict_proba(X)
    b = RandomForest(n_trees=10, rng_seed=5).fit(X, y).predict_proba(X)
    assert np.array_equal(a, b)


def test_oob_scores():
    X, y = _blobs(shift=3.0)
    rf = RandomForest(n_trees=40, rng_seed=2).fit(X, y, keep_inbag=True)
    oob = rf.oob_proba(X)
    ok = np.isfinite(oob)
    assert ok.mean() > 0.95 and auc(y[ok], oob[ok]) > 0.9


def test_logreg_without_penalty_matches_sklearn():
    X, y = _blobs(n=300, p=3, shift=1.0, seed=4)
    ours = LogRegEN(lam1=0.0, lam2=0.0, balanced=False, max_iter=200).fit(X, y)
    Xs = ours.scaler.transform(X)
    ref = LogisticRegression(penalty=None, tol=1e-12, max_iter=10_000).fit(Xs, y)
    assert np.allclose(ours.coef, ref.coef_[0], atol=1e-5)
    assert ours.intercept == pytest.approx(ref.intercept_[0], abs=1e-5)


def test_logreg_l1_sparsifies_and_is_optimal():
    X, y = _blobs(n=300, p=6, shift=1.5, seed=2)
    m = LogRegEN(lam1=0.05, lam2=0.0, balanced=False).fit(X, y)
    assert m.n_nonzero() < 6 and m.coef[0] != 0.0
    Xs = m.scaler.transform(X)
    w = np.ones(len(y))
    f0 = objective(Xs, y, w, m.intercept, m.coef, 0.05, 0.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        d = 1e-3 * rng.standard_normal(6)
        assert objective(Xs, y, w, m.intercept, m.coef + d, 0.05, 0.0) >= f0 - 1e-12


def test_model_wrapper_round_trip_and_schema():
    X, y = _blobs()
    names = ("a", "b", "c", "d")
    model = train_logreg_en(X, y, names, 1e-3, 0.0)
    clone = ClassifierModel.from_json(model.to_json())
    assert np.allclose(clone.predict_proba(X, names), model.predict_proba(X))
    with pytest.raises(SchemaMismatchError):
        clone.predict_proba(X, ("a", "b", "d", "c"))
    with pytest.raises(SchemaMismatchError):
        check_feature_names(names, ("a", "b", "c", "e"))
    bad = json.loads(model.to_json())
    bad["version"] = 99
    with pytest.raises(SchemaMismatchError):
        ClassifierModel.from_json(json.dumps(bad))


def test_stratified_folds_balance_groups():
    y = np.r_[np.zeros(50), np.ones(50)].astype(int)
    g = np.array(["x", "y"] * 50)
    folds = stratified_folds(y, g, 5)
    for f in range(5):
        m = folds == f
        assert abs(np.sum(y[m]) - 10) <= 1
    with pytest.raises(StratificationError):
        stratified_folds(y, g, 1)


def test_zero_fp_threshold_is_strict():
    s = np.array([0.1, 0.4, 0.4, 0.9])
    y = np.array([0, 0, 1, 1])
    thr = zero_fp_threshold(s, y)
    assert thr == 0.4 and not np.any((s > thr) & (y == 0))
    with pytest.raises(StratificationError):
        zero_fp_threshold(s, np.ones(4))


def test_cv_zero_fp_has_no_false_positives():
    X, y = _blobs(n=300, shift=2.5)
    fam = np.where(y == 1, "BE", "SEP")
    rep = cv_zero_fp(X, y, fam, {"kind": "RandomForest", "n_trees": 20, "rng_seed": 0})
    assert rep.held_out_fp == 0
    assert 0.0 <= rep.recall_at_zero_fp <= 1.0 and rep.auc > 0.9
    assert len(rep.fold_recalls) == 5


def test_evaluate_reports_family_recall():
    X, y = _blobs(n=200, shift=4.0)
    fam = np.where(y == 1, "BE", "SEP")
    model = train_random_forest(X, y, ("a", "b", "c", "d"), n_trees=15)
    rep = evaluate(model, X, y, fam, names=("a", "b", "c", "d"))
    assert set(rep.per_family_recall) == {"BE"}
    assert rep.auc > 0.99


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_auc_is_rank_invariant(seed):
    rng = np.random.default_rng(seed)
    y = np.r_[0, 1, rng.integers(0, 2, 40)]
    s = rng.random(y.size)
    assert auc(y, s) == pytest.approx(auc(y, np.exp(3 * s)), abs=1e-12)
    assert auc(y, s) + auc(y, -s) == pytest.approx(1.0, abs=1e-12)
