"""ROC curves, trapezoid AUC and confusion counts."""

from __future__ import annotations

import numpy as np


def roc_curve(y, scores) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(fpr, tpr, thresholds) sweeping over unique scores, highest first.

    A sample is called positive when its score is >= the threshold;
    the curve starts at (0, 0) with threshold +inf.
    """
    y = np.asarray(y).astype(bool)
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    distinct = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tps = np.cumsum(y)[distinct]
    fps = (distinct + 1) - tps
    P, N = y.sum(), (~y).sum()
    tpr = np.r_[0.0, tps / P] if P else np.r_[0.0, np.zeros(distinct.size)]
    fpr = np.r_[0.0, fps / N] if N else np.r_[0.0, np.zeros(distinct.size)]
    return fpr, tpr, np.r_[np.inf, s[distinct]]


def auc(y, scores) -> float:
    fpr, tpr, _ = roc_curve(y, scores)
    return float(np.trapezoid(tpr, fpr)) if hasattr(np, "trapezoid") else float(np.trapz(tpr, fpr))


def confusion(y, scores, threshold: float = 0.5) -> dict[str, int]:
    """Counts with the positive call ``score > threshold``."""
    y = np.asarray(y).astype(bool)
    pred = np.asarray(scores) > threshold
    return {"tp": int(np.sum(pred & y)), "fp": int(np.sum(pred & ~y)),
            "tn": int(np.sum(~pred & ~y)), "fn": int(np.sum(~pred & y))}


def recall_fpr(conf: dict) -> tuple[float, float]:
    pos = conf["tp"] + conf["fn"]
    neg = conf["fp"] + conf["tn"]
    return (conf["tp"] / pos if pos else float("nan"), conf["fp"] / neg if neg else float("nan"))
