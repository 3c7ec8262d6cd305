"""Per-state feature vectors for the bound-entanglement classifiers."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import moments, spectral
from .qstate import DensityMatrix, StateLabel

CORE8 = ("S1", "G1", "D1", "S2", "G2", "D2", "C3", "C4")

_K = range(1, 10)
EXT83 = tuple(
    [f"I{k}" for k in _K if k > 1]
    + [f"mu{k}" for k in _K if k > 1]
    + [f"S{k}" for k in _K] + [f"G{k}" for k in _K] + [f"D{k}" for k in _K]
    + ["Rconc", "Q2", "Q4"]
    + [f"SP{k}" for k in _K] + [f"GP{k}" for k in _K] + [f"DP{k}" for k in _K]
    + ["RPconc", "QP2", "QP4", "dG2", "dQ2"]
    + ["dEG", "R4", "lminPT_I2", "SE_gap", "SV_ent"]
)

IMPUTE_VALUE = 1.0


class Scheme(str, Enum):
    POLY2 = "Poly2"
    SIGNED_LOG = "SignedLog"
    SIGNED_SQRT = "SignedSqrt"


@dataclass(frozen=True)
class FeatureVector:
    names: tuple
    values: np.ndarray
    label: StateLabel | None = None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, map(float, self.values)))

    def __len__(self) -> int:
        return len(self.names)


def impute(values) -> np.ndarray:
    """Replace undefined entries (NaN) by the degenerate-ratio value 1."""
    v = np.array(values, dtype=float)
    v[~np.isfinite(v)] = IMPUTE_VALUE
    return v


def core8(rho: DensityMatrix, label: StateLabel | None = None) -> FeatureVector:
    rm = moments.compute_realign_moments(rho, 2)
    ms = moments.compute_moments(rho, 4)
    vals = [rm.sigma[0], rm.g[0], rm.d_gap[0], rm.sigma[1], rm.g[1], rm.d_gap[1], ms.c_k(3), ms.c_k(4)]
    return FeatureVector(CORE8, impute(vals), label)


def _rank_features(rho: DensityMatrix) -> list[float]:
    lam = spectral.herm_eigvals(rho.data)
    lam_pt = spectral.herm_eigvals(spectral.partial_transpose(rho, "A"))
    i2 = float(np.sum(lam ** 2))
    gap = float(lam[3] - lam[4]) if lam.size > 4 else moments.UNDEFINED
    r4 = float(np.sum(lam[:4] ** 2) / i2)
    se_gap = spectral.von_neumann_entropy(spectral.partial_transpose(rho, "A")) - spectral.von_neumann_entropy(rho.data)
    sv_ent = spectral.sv_entropy(spectral.realign(rho))
    return [gap, r4, float(lam_pt[-1] / i2), se_gap, sv_ent]


def ext83(rho: DensityMatrix, label: StateLabel | None = None) -> FeatureVector:
    ms = moments.compute_moments(rho, 9)
    rm = moments.compute_realign_moments(rho, 9)
    r = rm.ratios
    vals = (
        list(ms.purity[1:]) + list(ms.mu[1:])
        + list(rm.sigma) + list(rm.g) + list(rm.d_gap)
        + [r["S2sq_S4"], r["Q2"], r["Q4"]]
        + list(rm.sp) + list(rm.gp) + list(rm.dp)
        + [r["SP2sq_SP4"], r["QP2"], r["QP4"], rm.delta_g2, r["dQ2"]]
        + _rank_features(rho)
    )
    return FeatureVector(EXT83, impute(vals), label)


def poly2_names(names) -> tuple:
    names = list(names)
    out = list(names)
    for i, a in enumerate(names):
        for b in names[i:]:
            out.append(f"{a}^2" if a == b else f"{a}*{b}")
    return tuple(out)


def expand(fv: FeatureVector, scheme: Scheme | str) -> FeatureVector:
    """Poly2 appends squares and pairwise products; the signed maps transform in place."""
    scheme = Scheme(scheme)
    x = np.asarray(fv.values, dtype=float)
    if scheme is Scheme.POLY2:
        iu = np.triu_indices(x.size)
        vals = np.concatenate([x, np.outer(x, x)[iu]])
        return FeatureVector(poly2_names(fv.names), vals, fv.label)
    if scheme is Scheme.SIGNED_LOG:
        return FeatureVector(tuple(f"slog({n})" for n in fv.names), np.sign(x) * np.log1p(np.abs(x)), fv.label)
    return FeatureVector(tuple(f"ssqrt({n})" for n in fv.names), np.sign(x) * np.sqrt(np.abs(x)), fv.label)


def poly2_matrix(X: np.ndarray) -> np.ndarray:
    """Row-wise Poly2 expansion of a feature matrix."""
    X = np.asarray(X, dtype=float)
    iu = np.triu_indices(X.shape[1])
    prods = X[:, iu[0]] * X[:, iu[1]]
    return np.hstack([X, prods])


FEATURE_SETS = {"CORE8": core8, "EXT83": ext83}


def feature_matrix(states, feature_set: str = "CORE8", poly2: bool = False) -> tuple[np.ndarray, tuple]:
    fn = FEATURE_SETS[feature_set]
    rows = [fn(s).values for s in states]
    names = CORE8 if feature_set == "CORE8" else EXT83
    X = np.array(rows)
    if poly2:
        return poly2_matrix(X), poly2_names(names)
    return X, names
