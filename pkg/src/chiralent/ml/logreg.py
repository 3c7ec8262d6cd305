"""Elastic-net logistic regression by IRLS outer steps and coordinate descent.

Objective (per-sample weights w_i, W = Σ w_i):

    F(b, β) = (1/W) Σ w_i [log(1 + e^{η_i}) − y_i η_i] + λ₁‖β‖₁ + ½λ₂‖β‖²,
    η_i = b + x_i·β.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def balanced_weights(y) -> np.ndarray:
    y = np.asarray(y)
    n = y.size
    w = np.empty(n)
    for c in (0, 1):
        nc = np.sum(y == c)
        w[y == c] = n / (2.0 * nc) if nc else 0.0
    return w


def sklearn_penalties(C: float, l1_ratio: float, n_samples: int) -> tuple[float, float]:
    """λ₁, λ₂ matching the C / l1_ratio parametrization with weights summing to n."""
    return l1_ratio / (C * n_samples), (1.0 - l1_ratio) / (C * n_samples)


@dataclass
class Scaler:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Scaler":
        X = np.asarray(X, dtype=float)
        sd = X.std(axis=0)
        return cls(X.mean(axis=0), np.where(sd > 1e-12, sd, 1.0))

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale


def objective(X, y, w, b, beta, lam1, lam2) -> float:
    eta = b + X @ beta
    loss = np.sum(w * (np.logaddexp(0.0, eta) - y * eta)) / np.sum(w)
    return float(loss + lam1 * np.abs(beta).sum() + 0.5 * lam2 * beta @ beta)


def _soft(x, t):
    return np.sign(x) * max(abs(x) - t, 0.0)


def _cd_quadratic(X, z, s, b, beta, lam1, lam2, sweeps=300, tol=1e-10):
    """Coordinate descent on ½Σ s_i (z_i − b − x_i·β)² + penalties.

    Works on the weighted Gram matrix of [1, X], so a sweep costs O(p²)
    regardless of the sample count.
    """
    Xa = np.hstack([np.ones((X.shape[0], 1)), X])
    G = Xa.T @ (s[:, None] * Xa)
    c = Xa.T @ (s * z)
    theta = np.r_[b, beta]
    Gt = G @ theta
    pen1 = np.r_[0.0, np.full(beta.size, lam1)]
    pen2 = np.r_[0.0, np.full(beta.size, lam2)]
    diag = np.diag(G)
    for _ in range(sweeps):
        max_delta = 0.0
        for j in range(theta.size):
            old = theta[j]
            rho_j = c[j] - Gt[j] + diag[j] * old
            new = _soft(rho_j, pen1[j]) / (diag[j] + pen2[j]) if diag[j] + pen2[j] > 0 else 0.0
            if new != old:
                Gt += G[:, j] * (new - old)
                theta[j] = new
                max_delta = max(max_delta, abs(new - old))
        if max_delta < tol:
            break
    return float(theta[0]), theta[1:]


@dataclass
class FitInfo:
    n_iter: int
    converged: bool
    objective: float
    rel_change: float


def fit_logreg_en(X, y, lam1: float, lam2: float, sample_weight=None, max_iter: int = 500,
                  tol: float = 1e-8) -> tuple[float, np.ndarray, FitInfo]:
    """Return (intercept, coefficients, info) for already standardized ``X``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    W = w.sum()
    ybar = np.clip((w @ y) / W, 1e-6, 1 - 1e-6)
    b, beta = float(np.log(ybar / (1 - ybar))), np.zeros(p)
    F = objective(X, y, w, b, beta, lam1, lam2)
    rel = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        eta = b + X @ beta
        prob = sigmoid(eta)
        h = np.maximum(prob * (1 - prob), 1e-5)
        s = w * h / W
        z = eta + (y - prob) / h
        b_new, beta_new = _cd_quadratic(X, z, s, b, beta.copy(), lam1, lam2)
        # backtrack along the Newton direction until the true objective does not increase
        step = 1.0
        while True:
            bt = b + step * (b_new - b)
            bet = beta + step * (beta_new - beta)
            Ft = objective(X, y, w, bt, bet, lam1, lam2)
            if Ft <= F + 1e-15 or step < 1e-6:
                break
            step *= 0.5
        rel = abs(F - Ft) / max(abs(F), 1e-300)
        b, beta, F = bt, bet, Ft
        if rel < tol:
            return b, beta, FitInfo(it, True, F, rel)
    warnings.warn(f"elastic-net logistic regression stopped at max_iter={max_iter} "
                  f"with relative objective change {rel:.2e}", RuntimeWarning, stacklevel=2)
    return b, beta, FitInfo(it, False, F, rel)


class LogRegEN:
    """Standardize-then-fit wrapper; the scaler is fit on the training data only."""

    kind = "LogRegEN"

    def __init__(self, lam1: float = 1e-3, lam2: float = 0.0, balanced: bool = True, max_iter: int = 500,
                 C: float | None = None, l1_ratio: float | None = None):
        self.lam1, self.lam2 = lam1, lam2
        self.C, self.l1_ratio = C, l1_ratio
        self.balanced = balanced
        self.max_iter = max_iter
        self.scaler: Scaler | None = None
        self.intercept = 0.0
        self.coef: np.ndarray | None = None
        self.info: FitInfo | None = None

    def config(self) -> dict:
        return {"lam1": self.lam1, "lam2": self.lam2, "balanced": self.balanced, "max_iter": self.max_iter,
                "C": self.C, "l1_ratio": self.l1_ratio}

    def fit(self, X, y) -> "LogRegEN":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if self.C is not None:
            self.lam1, self.lam2 = sklearn_penalties(self.C, self.l1_ratio if self.l1_ratio is not None else 1.0, len(y))
        self.scaler = Scaler.fit(X)
        w = balanced_weights(y) if self.balanced else np.ones(len(y))
        self.intercept, self.coef, self.info = fit_logreg_en(
            self.scaler.transform(X), y, self.lam1, self.lam2, w, self.max_iter)
        return self

    def decision_function(self, X) -> np.ndarray:
        return self.intercept + self.scaler.transform(X) @ self.coef

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def n_nonzero(self) -> int:
        return int(np.sum(self.coef != 0))

    def to_dict(self) -> dict:
        return {"config": self.config(), "intercept": self.intercept, "coef": self.coef.tolist(),
                "mean": self.scaler.mean.tolist(), "scale": self.scaler.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LogRegEN":
        cfg = dict(d["config"])
        m = cls(**cfg)
        m.intercept = float(d["intercept"])
        m.coef = np.array(d["coef"], dtype=float)
        m.scaler = Scaler(np.array(d["mean"]), np.array(d["scale"]))
        return m
