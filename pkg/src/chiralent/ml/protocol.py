"""Model wrapper, stratified folds, and the held-out zero-false-positive protocol."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import SchemaMismatchError, StratificationError
from .forest import RandomForest
from .logreg import LogRegEN
from .metrics import auc, confusion, recall_fpr, roc_curve

MODEL_FORMAT_VERSION = 1
KINDS = {"LogRegEN": LogRegEN, "RandomForest": RandomForest}


def check_feature_names(expected, names) -> None:
    """Raise with an explicit diff unless ``names`` equals ``expected`` in order."""
    names, expected = tuple(names), tuple(expected)
    if names != expected:
        missing = [n for n in expected if n not in names]
        extra = [n for n in names if n not in expected]
        raise SchemaMismatchError(
            f"feature names differ from the model: missing {missing}, unexpected {extra}"
            + ("" if missing or extra else " (same names, different order)"))


@dataclass
class ClassifierModel:
    kind: str
    estimator: object
    feature_names: tuple
    training_config: dict = field(default_factory=dict)

    def check_names(self, names) -> None:
        check_feature_names(self.feature_names, names)

    def predict_proba(self, X, names=None) -> np.ndarray:
        if names is not None:
            self.check_names(names)
        return self.estimator.predict_proba(X)

    def to_json(self) -> str:
        return json.dumps({"version": MODEL_FORMAT_VERSION, "kind": self.kind,
                           "feature_names": list(self.feature_names),
                           "training_config": self.training_config,
                           "parameters": self.estimator.to_dict()})

    @classmethod
    def from_json(cls, text: str) -> "ClassifierModel":
        d = json.loads(text)
        if d.get("version") != MODEL_FORMAT_VERSION:
            raise SchemaMismatchError(f"unsupported model format version {d.get('version')}")
        est = KINDS[d["kind"]].from_dict(d["parameters"])
        return cls(d["kind"], est, tuple(d["feature_names"]), d.get("training_config", {}))


def make_estimator(config: dict):
    cfg = dict(config)
    kind = cfg.pop("kind")
    return KINDS[kind](**cfg)


def train(X, y, feature_names, config: dict) -> ClassifierModel:
    est = make_estimator(config).fit(X, y)
    return ClassifierModel(config["kind"], est, tuple(feature_names), dict(config))


def train_logreg_en(X, y, feature_names, lambda_l1: float, lambda_l2: float, max_iter: int = 500) -> ClassifierModel:
    return train(X, y, feature_names, {"kind": "LogRegEN", "lam1": lambda_l1, "lam2": lambda_l2, "max_iter": max_iter})


def train_random_forest(X, y, feature_names, n_trees: int = 500, max_depth=None, features_per_split="sqrt",
                        rng_seed: int = 0, extra_trees: bool = False) -> ClassifierModel:
    return train(X, y, feature_names, {"kind": "RandomForest", "n_trees": n_trees, "max_depth": max_depth,
                                       "features_per_split": features_per_split, "rng_seed": rng_seed,
                                       "extra_trees": extra_trees})


def stratified_folds(y, groups, n_folds: int, rng_seed: int = 0) -> np.ndarray:
    """Fold id per row, balancing every (label, group) stratum across folds."""
    if n_folds < 2:
        raise StratificationError("need at least two folds")
    y = np.asarray(y)
    groups = np.asarray(groups)
    rng = np.random.default_rng(rng_seed)
    fold = np.empty(y.size, dtype=int)
    offset = 0
    for key in sorted(set(zip(y.tolist(), groups.tolist()))):
        idx = np.flatnonzero((y == key[0]) & (groups == key[1]))
        idx = rng.permutation(idx)
        fold[idx] = (np.arange(idx.size) + offset) % n_folds
        offset += idx.size
    return fold


@dataclass
class EvalReport:
    auc: float
    recall_at_zero_fp: float
    confusion: dict
    per_family_recall: dict
    roc_points: list
    thresholds: list = field(default_factory=list)
    fold_recalls: list = field(default_factory=list)
    fold_aucs: list = field(default_factory=list)
    held_out_fp: int = 0

    def to_dict(self) -> dict:
        return {
            "auc": self.auc, "recall_at_zero_fp": self.recall_at_zero_fp, "confusion": self.confusion,
            "per_family_recall": self.per_family_recall, "thresholds": self.thresholds,
            "fold_recalls": self.fold_recalls, "fold_aucs": self.fold_aucs, "held_out_fp": self.held_out_fp,
        }

    def recall_fpr_at_half(self) -> tuple[float, float]:
        return recall_fpr(self.confusion)


def zero_fp_threshold(scores, y) -> float:
    """Maximum separable score; BE calls need a strictly larger score."""
    sep = np.asarray(scores)[np.asarray(y) == 0]
    if sep.size == 0:
        raise StratificationError("held-out fold has no separable states")
    return float(sep.max())


def cv_zero_fp(X, y, family, model_config: dict, n_folds: int = 5, rng_seed: int = 0) -> EvalReport:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    family = np.asarray(family)
    folds = stratified_folds(y, family, n_folds, rng_seed)
    scores = np.empty(y.size)
    called = np.zeros(y.size, dtype=bool)
    thresholds, recalls, aucs = [], [], []
    fp_total = 0
    for f in range(n_folds):
        te, tr = folds == f, folds != f
        if not np.any(y[te] == 0):
            raise StratificationError(f"fold {f} has no separable states")
        est = make_estimator(model_config).fit(X[tr], y[tr])
        s = est.predict_proba(X[te])
        thr = zero_fp_threshold(s, y[te])
        call = s > thr
        fp = int(np.sum(call & (y[te] == 0)))
        if fp:
            raise AssertionError("zero-FP protocol produced a false positive")  # cannot happen by construction
        fp_total += fp
        scores[te] = s
        called[te] = call
        thresholds.append(thr)
        recalls.append(float(np.mean(call[y[te] == 1])))
        aucs.append(auc(y[te], s))
    fams = {}
    for name in np.unique(family[y == 1]):
        m = (family == name) & (y == 1)
        fams[str(name)] = float(np.mean(called[m]))
    fpr, tpr, _ = roc_curve(y, scores)
    return EvalReport(
        auc=float(np.mean(aucs)), recall_at_zero_fp=float(np.mean(recalls)),
        confusion=confusion(y, scores, 0.5), per_family_recall=fams,
        roc_points=list(zip(fpr.tolist(), tpr.tolist())), thresholds=thresholds,
        fold_recalls=recalls, fold_aucs=aucs, held_out_fp=fp_total,
    )


def evaluate(model, X, y, family=None, names=None) -> EvalReport:
    """ROC/AUC over all scores, confusion at 0.5, and recall at the max-SEP threshold."""
    est = model.estimator if isinstance(model, ClassifierModel) else model
    if isinstance(model, ClassifierModel) and names is not None:
        model.check_names(names)
    y = np.asarray(y)
    s = est.predict_proba(np.asarray(X, dtype=float))
    fpr, tpr, _ = roc_curve(y, s)
    fams = {}
    if family is not None and np.any(y == 0):
        thr = zero_fp_threshold(s, y)
        family = np.asarray(family)
        for name in np.unique(family[y == 1]):
            m = (family == name) & (y == 1)
            fams[str(name)] = float(np.mean(s[m] > thr))
    rec = float(np.mean(s[y == 1] > zero_fp_threshold(s, y))) if np.any(y == 0) and np.any(y == 1) else float("nan")
    return EvalReport(auc=auc(y, s), recall_at_zero_fp=rec, confusion=confusion(y, s, 0.5),
                      per_family_recall=fams, roc_points=list(zip(fpr.tolist(), tpr.tolist())))


def lambda_grid(n_samples: int) -> list[dict]:
    """Log-spaced λ₁ grid plus the C = 1, l1_ratio = 0.7 point."""
    grid = [{"kind": "LogRegEN", "lam1": float(l), "lam2": 0.0} for l in np.logspace(-4, -1, 7)]
    grid.append({"kind": "LogRegEN", "C": 1.0, "l1_ratio": 0.7})
    return grid


def select_by_cv_auc(X, y, family, grid, n_folds: int = 5, rng_seed: int = 0) -> tuple[dict, list]:
    results = [(cfg, cv_zero_fp(X, y, family, cfg, n_folds, rng_seed).auc) for cfg in grid]
    best = max(results, key=lambda r: r[1])[0]
    return best, results
