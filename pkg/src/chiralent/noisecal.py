"""Depolarizing noise, shot-noise simulation and maximum-likelihood calibration.

Two calibration schemes are provided:

* ``two_stage_mle`` for the pure family cos(θ/2)|00> + sin(θ/2)|11>, where
  each moment circuit k is attenuated by a factor f_k;
* ``per_circuit_mle`` for the realignment features (Σ₁, G₁, Σ₂, G₂) of 3x3
  states measured on three circuit architectures with separate fidelities.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from . import moments as mom
from . import qstate
from .errors import IdentifiabilityError, InconsistentMomentsError, ParameterError
from .qstate import DensityMatrix

# ------------------------------------------------------------------ noise

def depolarize(rho: DensityMatrix, eta: float) -> DensityMatrix:
    """(1 − η)ρ + η·I/d."""
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"depolarizing strength must lie in [0, 1], got {eta}")
    return qstate.mix_white(rho, eta)


@dataclass(frozen=True)
class NoisySample:
    true_value: float
    shots: int
    estimate: float
    stderr: float
    seed: int | None = None


def sample_expectation(value: float, shots: int, rng) -> NoisySample:
    """Estimate a ±1-valued expectation ``value`` from ``shots`` ancilla readouts."""
    if not -1.0 - 1e-12 <= value <= 1.0 + 1e-12:
        raise ParameterError(f"an expectation of a ±1 observable must lie in [-1, 1], got {value}")
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng) if seed is not None or rng is None else rng
    p0 = min(max(0.5 * (1.0 + value), 0.0), 1.0)
    n0 = rng.binomial(shots, p0)
    est = 2.0 * n0 / shots - 1.0
    return NoisySample(float(value), int(shots), float(est), math.sqrt(max(1.0 - est * est, 0.0) / shots), seed)


# ------------------------------------------------------------ RMSE study

@dataclass
class RmseFit:
    dims: tuple
    eta_grid: np.ndarray
    rmse: np.ndarray
    slope: float
    ci: tuple[float, float]
    slope_stderr: float
    r2: float
    n_states: int

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "eta": self.eta_grid.tolist(), "rmse": self.rmse.tolist(),
                "slope": self.slope, "ci": list(self.ci), "slope_stderr": self.slope_stderr,
                "r2": self.r2, "n_states": self.n_states}


def random_mixed_batch(dims, n: int, rng) -> np.ndarray:
    """n full-rank Hilbert–Schmidt (square Ginibre) density matrices, shape (n, d, d)."""
    d = qstate.as_dims(dims).total
    g = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    m = g @ np.conj(np.swapaxes(g, 1, 2))
    return m / np.trace(m, axis1=1, axis2=2).real[:, None, None]


def _batch_pt(m: np.ndarray, da: int, db: int) -> np.ndarray:
    n = m.shape[0]
    return m.reshape(n, da, db, da, db).transpose(0, 3, 2, 1, 4).reshape(n, da * db, da * db)


def _slope_through_origin(x, y) -> float:
    return float(x @ y / (x @ x))


def rmse_study(dims=(2, 2), eta_grid=None, n_states: int = 10_000, rng_seed: int = 0,
               n_boot: int = 500) -> RmseFit:
    """RMSE of the noisy negativity against the clean one as a function of η.

    Since the partial transpose of I/d is I/d, the noisy PT spectrum is
    (1 − η)λ + η/d, so one eigensolve per state serves the whole η grid.
    """
    if n_states < 100:
        raise ParameterError(f"need at least 100 states, got {n_states}")
    dims = qstate.as_dims(dims)
    eta = np.linspace(0.0, 0.25, 11) if eta_grid is None else np.asarray(eta_grid, dtype=float)
    rng = np.random.default_rng(rng_seed)
    d = dims.total
    lam = np.linalg.eigvalsh(_batch_pt(random_mixed_batch(dims, n_states, rng), dims.d_a, dims.d_b))
    clean = np.clip(-lam, 0.0, None).sum(axis=1)
    noisy = np.clip(-((1 - eta[None, :, None]) * lam[:, None, :] + eta[None, :, None] / d), 0.0, None).sum(axis=2)
    sq = (noisy - clean[:, None]) ** 2
    rmse = np.sqrt(sq.mean(axis=0))
    slope = _slope_through_origin(eta, rmse)
    resid = rmse - slope * eta
    r2 = 1.0 - float(resid @ resid) / float(((rmse - rmse.mean()) ** 2).sum())
    boot = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n_states, n_states)
        boot[b] = _slope_through_origin(eta, np.sqrt(sq[idx].mean(axis=0)))
    lo, hi = np.percentile(boot, [2.5, 97.5])
    return RmseFit((dims.d_a, dims.d_b), eta, rmse, slope, (float(lo), float(hi)), float(boot.std(ddof=1)), r2, n_states)


def separable_false_positives(n_trials: int = 10_000, dims=(2, 2), eta_max: float = 0.25,
                              rng_seed: int = 0, tol: float = -1e-9) -> int:
    """Count NPT verdicts on depolarized random separable states (exact spectra)."""
    dims = qstate.as_dims(dims)
    rng = np.random.default_rng(rng_seed)
    count = 0
    for _ in range(n_trials):
        K = int(rng.integers(1, 2 * dims.total + 1))
        rho = DensityMatrix(qstate.random_separable_matrix(dims, K, rng), dims)
        noisy = depolarize(rho, float(rng.uniform(0.0, eta_max)))
        if mom.negativity(noisy).pt_spectrum.min() < tol:
            count += 1
    return count


# ------------------------------------------------------------ bootstrap

def bootstrap_errors(counts, B: int = 1000, statistic: Callable | None = None, rng_seed: int = 0) -> float:
    """Standard deviation of ``statistic`` over resamples with replacement.

    ``counts`` is one array of shot outcomes or a sequence of such arrays (one
    per circuit); each array is resampled independently and ``statistic``
    receives the resampled array, or the list of arrays. The default statistic
    is the mean of a single array.
    """
    if B < 100:
        raise ParameterError(f"need at least 100 resamples, got {B}")
    multi = isinstance(counts, (list, tuple))
    arrays = [np.asarray(c) for c in (counts if multi else [counts])]
    if statistic is None:
        if multi:
            raise ParameterError("supply a statistic when resampling several outcome arrays")
        statistic = np.mean
    rng = np.random.default_rng(rng_seed)
    vals = np.empty(B)
    for b in range(B):
        res = [a[rng.integers(0, a.size, a.size)] for a in arrays]
        vals[b] = statistic(res if multi else res[0])
    vals = vals[np.isfinite(vals)]
    return float(vals.std(ddof=1)) if vals.size > 1 else float("nan")


def hadamard_outcomes(value: float, shots: int, rng) -> np.ndarray:
    """Simulated ±1 ancilla outcomes with mean ``value``."""
    p0 = min(max(0.5 * (1.0 + value), 0.0), 1.0)
    return np.where(rng.random(shots) < p0, 1, -1).astype(np.int8)


# ------------------------------------------------------- two-stage MLE

MOMENT_ORDERS = (2, 3, 4)
TORINO_2X2_F = {2: 0.729, 3: 0.612, 4: 0.456}


def _theory_moments(theta: float) -> np.ndarray:
    m = mom.pure_theta_moments(theta)
    return np.array([m["mu2"], m["mu3"], m["mu4"]])


@dataclass
class CalibrationFit:
    degradation: dict
    errors: dict
    nll: float
    theta_estimates: list = field(default_factory=list)
    physical_features: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else str(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def simulate_moment_measurements(thetas: Sequence[float], f: Mapping[int, float] = TORINO_2X2_F,
                                 shots: int = 100_000, rng_seed: int = 0) -> list[dict[int, NoisySample]]:
    """Shot-noisy μ₂, μ₃, μ₄ estimates for each θ with attenuation f_k."""
    rng = np.random.default_rng(rng_seed)
    out = []
    for th in thetas:
        ideal = _theory_moments(th)
        out.append({k: sample_expectation(f[k] * ideal[i], shots, rng) for i, k in enumerate(MOMENT_ORDERS)})
    return out


def _fit_c(meas: np.ndarray, f: np.ndarray, w: np.ndarray) -> float:
    """Minimize Σ_k w_k (m_k − f_k μ_k(c))² over c = cos²θ ∈ [0, 1].

    μ₂ = 1, μ₃ = (1 + 3c)/4, μ₄ = (1 + c)²/4, so the objective is a quartic in c
    and its minimum is at an endpoint or a real root of the cubic derivative.
    """
    P = np.polynomial.Polynomial
    model = [P([1.0]), P([0.25, 0.75]), P([0.25, 0.5, 0.25])]
    obj = sum(wk * (mk - fk * q) ** 2 for wk, mk, fk, q in zip(w, meas, f, model))
    cands = [0.0, 1.0] + [r.real for r in obj.deriv().roots() if abs(r.imag) < 1e-9 and 0.0 < r.real < 1.0]
    return float(min(cands, key=obj))


def two_stage_mle(measurements: Sequence[Mapping[int, NoisySample]], calibration_thetas: Sequence[float | None],
                  sigma_k: Mapping[int, float] | None = None) -> CalibrationFit:
    """Stage 1 fits f_k on the states with known θ; stage 2 fits every θ at fixed f_k.

    ``calibration_thetas[i]`` is the prepared angle of state i, or None for a
    blind state (trailing blind states may be omitted). Stage 1's Gaussian NLL
    separates over k into one-dimensional quadratics in f_k, so the bounded
    minimizer is the weighted least-squares ratio clipped to [0, 1]. Stage 2 is
    solved on c = cos²θ (monotone on [0, π/2]) and reported as θ.
    """
    n = len(measurements)
    cal = [(i, th) for i, th in enumerate(calibration_thetas) if th is not None]
    if len({round(th, 12) for _, th in cal}) < 2:
        raise IdentifiabilityError("calibration needs at least two distinct prepared angles")
    m = np.array([[s[k].estimate for k in MOMENT_ORDERS] for s in measurements])
    se = np.array([[s[k].stderr for k in MOMENT_ORDERS] for s in measurements])
    if sigma_k is not None:
        sig = np.tile([sigma_k[k] for k in MOMENT_ORDERS], (n, 1))
    else:
        sig = np.where(se > 0, se, np.min(se[se > 0]) if np.any(se > 0) else 1.0)
    ci = np.array([i for i, _ in cal])
    theo = np.array([_theory_moments(th) for _, th in cal])
    w = 1.0 / sig[ci] ** 2
    info = np.sum(w * theo ** 2, axis=0)
    if np.any(info <= 0):
        raise IdentifiabilityError("calibration moments carry no information on some f_k")
    f_hat = np.clip(np.sum(w * theo * m[ci], axis=0) / info, 0.0, 1.0)
    nll1 = float(np.sum(w * (m[ci] - f_hat * theo) ** 2) / 2)

    c_hat = np.array([_fit_c(m[i], f_hat, 1.0 / sig[i] ** 2) for i in range(n)])
    thetas = np.arccos(np.sqrt(np.clip(c_hat, 0.0, 1.0)))
    nll2 = 0.0
    phys = {}
    for i in range(n):
        pred = f_hat * _theory_moments(thetas[i])
        nll2 += float(np.sum((m[i] - pred) ** 2 / sig[i] ** 2) / 2)
        phys[i] = {f"mu{k}": float(m[i, j] / f_hat[j]) if f_hat[j] > 0 else float("nan")
                   for j, k in enumerate(MOMENT_ORDERS)}
        phys[i]["negativity"] = float(np.sin(thetas[i]) / 2)
    return CalibrationFit(
        degradation={f"f{k}": float(f_hat[j]) for j, k in enumerate(MOMENT_ORDERS)},
        errors={f"f{k}": float(1.0 / math.sqrt(info[j])) for j, k in enumerate(MOMENT_ORDERS)},
        nll=nll1 + nll2,
        theta_estimates=thetas.tolist(),
        physical_features=phys,
        extras={"stage1_nll": nll1, "stage2_nll": nll2},
    )


def calibration_sensitivity(shift_deg: float, thetas_deg: Sequence[float] = (0, 15, 30, 45, 60, 90),
                            f: Mapping[int, float] = TORINO_2X2_F, shots: int = 100_000,
                            rng_seed: int = 0) -> dict:
    """Refit with every calibration angle offset by ``shift_deg`` and report the f_k changes."""
    th = np.radians(np.asarray(thetas_deg, dtype=float))
    data = simulate_moment_measurements(th, f, shots, rng_seed)
    base = two_stage_mle(data, th.tolist())
    moved = two_stage_mle(data, (th + np.radians(shift_deg)).tolist())
    true_n = np.sin(th) / 2
    return {
        "nominal": base.degradation,
        "shifted": moved.degradation,
        "relative_change": {k: abs(moved.degradation[k] - v) / v for k, v in base.degradation.items()},
        "mean_negativity_error": float(np.mean(np.abs(np.sin(moved.theta_estimates) / 2 - true_n))),
        "nominal_negativity_error": float(np.mean(np.abs(np.sin(base.theta_estimates) / 2 - true_n))),
    }


def negativity_bootstrap(theta: float, f: Mapping[int, float] = TORINO_2X2_F, shots: int = 100_000,
                         B: int = 1000, rng_seed: int = 0, route: str = "newton_girard") -> float:
    """Bootstrap standard error of the calibrated negativity of one pure state.

    The three moment circuits are simulated at ``shots`` each. Per resample,
    route "newton_girard" rebuilds the PT spectrum from μ_k = m_k/f_k (resamples
    whose moments admit no real spectrum are dropped); route "theta" refits θ
    at fixed f_k and reports sin(θ)/2.
    """
    if route not in ("newton_girard", "theta"):
        raise ParameterError(f"unknown route {route!r}")
    rng = np.random.default_rng(rng_seed)
    ideal = _theory_moments(theta)
    fv = np.array([f[k] for k in MOMENT_ORDERS])
    outcomes = [hadamard_outcomes(fv[i] * ideal[i], shots, rng) for i in range(3)]
    sig = np.sqrt(np.maximum(1 - (fv * ideal) ** 2, 1e-12) / shots)

    def stat_theta(arrs):
        m = np.array([a.mean() for a in arrs], dtype=float)
        c = _fit_c(m, fv, 1.0 / sig ** 2)
        return math.sqrt(max(1.0 - c, 0.0)) / 2

    def stat_ng(arrs):
        m = np.array([a.mean() for a in arrs], dtype=float) / fv
        try:
            lam = mom.spectrum_from_power_sums(np.r_[1.0, m])
        except InconsistentMomentsError:
            return float("nan")
        return mom.negativity_from_spectrum(lam)

    return bootstrap_errors(outcomes, B, stat_ng if route == "newton_girard" else stat_theta, rng_seed + 1)


# -------------------------------------------------------- per-circuit MLE

FEATURES = ("S1", "G1", "S2", "G2")
FIDELITIES = ("g_S1", "f_G1", "f_S2G2")
FEATURE_FIDELITY = (0, 1, 2, 2)
DEFAULT_SIGMAS = {"S1": 0.015, "G1": 0.025, "S2": 0.015, "G2": 0.020}
FEZ_FIDELITIES = {"g_S1": 0.164, "f_G1": 0.594, "f_S2G2": 0.306}
SIGMA1_MAX = 3.0
SIGMA2_RANGE = (1.0 / 9.0, 1.0)
HESSIAN_STEP = 1e-5
DETECT_TOL = 1e-9


def feature_values(rho: DensityMatrix) -> dict[str, float]:
    r = mom.compute_realign_moments(rho, 2)
    return {"S1": float(r.sigma[0]), "G1": float(r.g[0]), "S2": float(r.sigma[1]), "G2": float(r.g[1])}


def calibration_states() -> dict[str, DensityMatrix]:
    """Product |00>, classically correlated (1/3)Σ|aa><aa|, and misaligned |0>|+>."""
    e0 = np.array([1.0, 0.0, 0.0])
    plus = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
    return {
        "product": qstate.make_product(e0, e0),
        "classical": qstate.make_classical_correlated(3),
        "misaligned": qstate.make_product(e0, plus),
    }


def calibration_theory() -> dict[str, dict[str, float]]:
    return {k: feature_values(v) for k, v in calibration_states().items()}


def simulate_raw_features(truth: Mapping[str, Mapping[str, float]], fidelities: Mapping[str, float] = FEZ_FIDELITIES,
                          sigmas: Mapping[str, float] = DEFAULT_SIGMAS, repeats: int = 1, rng=None,
                          shots: int | None = None, reference_shots: int = 4000) -> dict[str, dict[str, list]]:
    """Raw X = g_X·X_true plus Gaussian noise, ``repeats`` circuits per feature.

    ``sigmas`` are per-circuit standard deviations at ``reference_shots``; a
    different ``shots`` rescales them by √(reference_shots/shots).
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    scale = 1.0 if shots is None else math.sqrt(reference_shots / shots)
    out = {}
    for sid, feats in truth.items():
        out[sid] = {}
        for x, fi in zip(FEATURES, FEATURE_FIDELITY):
            g = fidelities[FIDELITIES[fi]]
            out[sid][x] = (g * feats[x] + scale * sigmas[x] * rng.standard_normal(repeats)).tolist()
    return out


def _rows(raw, theory, test_ids):
    """Flatten measurements into (fidelity idx, test idx or −1, feature idx, theory, value)."""
    fi, tj, xi, th, val = [], [], [], [], []
    for sid, feats in raw.items():
        j = test_ids.index(sid) if sid in test_ids else -1
        for x, vals in feats.items():
            k = FEATURES.index(x)
            for v in np.atleast_1d(np.asarray(vals, dtype=float)):
                fi.append(FEATURE_FIDELITY[k])
                tj.append(j)
                xi.append(k)
                th.append(theory[sid][x] if j < 0 else 0.0)
                val.append(v)
    return (np.array(fi), np.array(tj), np.array(xi), np.array(th), np.array(val))


class _PerCircuitModel:
    def __init__(self, cal_raw, cal_theory, test_raw, sigmas):
        self.test_ids = list(test_raw)
        overlap = set(self.test_ids) & set(cal_raw)
        if overlap:
            raise ParameterError(f"state ids used for both calibration and test: {sorted(overlap)}")
        raw = {**cal_raw, **test_raw}
        missing = [s for s in cal_raw if s not in cal_theory]
        if missing:
            raise ParameterError(f"calibration states without theory values: {missing}")
        self.fi, self.tj, self.xi, self.th, self.val = _rows(raw, cal_theory, self.test_ids)
        self.w = 1.0 / np.array([sigmas[FEATURES[k]] for k in self.xi]) ** 2
        self.n_test = len(self.test_ids)
        self.cal = self.tj < 0
        for f in range(3):
            if not np.any(self.cal & (self.fi == f) & (np.abs(self.th) > 0)):
                raise IdentifiabilityError(f"no calibration measurement constrains {FIDELITIES[f]}")

    # natural parameters φ = [g(3), (Σ1, G1, Σ2, G2) per test state]
    def nll_natural(self, phi):
        g = phi[:3]
        F = phi[3:].reshape(self.n_test, 4)
        x = np.where(self.cal, self.th, F[self.tj, self.xi] if self.n_test else 0.0)
        r = g[self.fi] * x - self.val
        return 0.5 * float(np.sum(self.w * r * r))

    @staticmethod
    def to_natural(z, n_test):
        g = z[:3]
        v = z[3:].reshape(n_test, 4)
        F = np.column_stack([v[:, 0], v[:, 1] * v[:, 0], v[:, 2], v[:, 3] * v[:, 2]]) if n_test else np.zeros((0, 4))
        return np.r_[g, F.ravel()]

    def nll_and_grad(self, z):
        g = z[:3]
        v = z[3:].reshape(self.n_test, 4)
        F = self.to_natural(z, self.n_test)[3:].reshape(self.n_test, 4)
        x = self.th.copy()
        if self.n_test:
            x[~self.cal] = F[self.tj[~self.cal], self.xi[~self.cal]]
        r = g[self.fi] * x - self.val
        wr = self.w * r
        grad_g = np.bincount(self.fi, weights=wr * x, minlength=3)
        dF = np.zeros((self.n_test, 4))
        t = ~self.cal
        np.add.at(dF, (self.tj[t], self.xi[t]), wr[t] * g[self.fi[t]])
        dv = np.column_stack([dF[:, 0] + v[:, 1] * dF[:, 1], v[:, 0] * dF[:, 1],
                              dF[:, 2] + v[:, 3] * dF[:, 3], v[:, 2] * dF[:, 3]]) if self.n_test else dF
        return 0.5 * float(np.sum(wr * r)), np.r_[grad_g, dv.ravel()]

    def bounds(self):
        b = [(0.0, 1.0)] * 3
        for _ in range(self.n_test):
            b += [(0.0, SIGMA1_MAX), (0.0, 1.0), SIGMA2_RANGE, (0.0, 1.0)]
        return b

    def data_init(self):
        g = np.empty(3)
        for f in range(3):
            m = self.cal & (self.fi == f)
            g[f] = np.clip(np.sum(self.w[m] * self.th[m] * self.val[m]) / np.sum(self.w[m] * self.th[m] ** 2), 0.02, 1.0)
        z = [g]
        for j in range(self.n_test):
            means = np.empty(4)
            for k in range(4):
                m = (self.tj == j) & (self.xi == k)
                means[k] = self.val[m].mean() / g[FEATURE_FIDELITY[k]] if m.any() else 0.5
            s1 = np.clip(means[0], 1e-3, SIGMA1_MAX)
            s2 = np.clip(means[2], *SIGMA2_RANGE)
            z.append([s1, np.clip(means[1] / s1, 0, 1), s2, np.clip(means[3] / s2, 0, 1)])
        return np.concatenate([np.ravel(a) for a in z])

    def random_init(self, rng):
        lo, hi = np.array(self.bounds()).T
        z = lo + rng.random(lo.size) * (hi - lo)
        z[:3] = rng.uniform(0.05, 1.0, 3)
        return z


def _cramer_rao(fun, phi, step=HESSIAN_STEP):
    """Covariance from the inverse central-difference Hessian; inf along null directions."""
    n = phi.size
    h = step * np.maximum(np.abs(phi), 1.0)
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h[i]
            ej[j] = h[j]
            H[i, j] = H[j, i] = (fun(phi + ei + ej) - fun(phi + ei - ej) - fun(phi - ei + ej)
                                 + fun(phi - ei - ej)) / (4 * h[i] * h[j])
    vals, vecs = np.linalg.eigh(H)
    good = vals > 1e-10 * max(vals.max(), 1e-300)
    cov = (vecs[:, good] / vals[good]) @ vecs[:, good].T
    null = vecs[:, ~good]
    unbounded = np.any(np.abs(null) > 1e-6, axis=1) if null.size else np.zeros(n, dtype=bool)
    cov[unbounded, :] = np.inf
    cov[:, unbounded] = np.inf
    return cov, H


def per_circuit_mle(cal_raw: Mapping, test_raw: Mapping, cal_theory: Mapping | None = None,
                    sigmas: Mapping[str, float] = DEFAULT_SIGMAS, restarts: int = 4, rng_seed: int = 0,
                    with_errors: bool = True) -> CalibrationFit:
    """Joint fit of three fidelities and (Σ₁, G₁, Σ₂, G₂) for every test state.

    ``cal_raw`` / ``test_raw`` map state id → feature → raw value(s). Test
    features are parametrized as G_k = u_k Σ_k with u_k ∈ [0, 1], so the
    constraints Σ_k ≥ G_k ≥ 0, Σ₁ ≤ 3 and 1/9 ≤ Σ₂ ≤ 1 are box bounds for
    L-BFGS-B. The first start is data-initialized; the rest are random.
    """
    cal_theory = calibration_theory() if cal_theory is None else cal_theory
    model = _PerCircuitModel(cal_raw, cal_theory, test_raw, sigmas)
    rng = np.random.default_rng(rng_seed)
    starts = [model.data_init()] + [model.random_init(rng) for _ in range(max(restarts - 1, 0))]
    results = []
    for z0 in starts:
        hist = []
        res = minimize(model.nll_and_grad, z0, jac=True, method="L-BFGS-B", bounds=model.bounds(),
                       callback=lambda zk: hist.append(model.nll_and_grad(zk)[0]),
                       options={"maxiter": 5000, "ftol": 1e-15, "gtol": 1e-10})
        results.append((float(res.fun), res.x, hist))
    results.sort(key=lambda r: r[0])
    nll, z, hist = results[0]
    phi = model.to_natural(z, model.n_test)
    g = phi[:3]
    F = phi[3:].reshape(model.n_test, 4)
    if with_errors:
        cov, _ = _cramer_rao(model.nll_natural, phi)
        sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    else:
        cov = np.full((phi.size, phi.size), np.nan)
        sd = np.full(phi.size, np.nan)
    phys, errs = {}, {name: float(sd[i]) for i, name in enumerate(FIDELITIES)}
    for j, sid in enumerate(model.test_ids):
        b = 3 + 4 * j
        feats = {x: float(F[j, k]) for k, x in enumerate(FEATURES)}
        feats["D1"] = feats["S1"] - feats["G1"]
        feats["D2"] = feats["S2"] - feats["G2"]
        phys[sid] = feats
        e = {x: float(sd[b + k]) for k, x in enumerate(FEATURES)}
        for name, (s, gg) in (("D1", (b, b + 1)), ("D2", (b + 2, b + 3))):
            var = cov[s, s] + cov[gg, gg] - 2 * cov[s, gg]
            e[name] = float(math.sqrt(max(var, 0.0))) if np.isfinite(var) else float("inf")
        errs[sid] = e
    return CalibrationFit(
        degradation={name: float(g[i]) for i, name in enumerate(FIDELITIES)},
        errors=errs, nll=nll, physical_features=phys,
        extras={"restart_nlls": [r[0] for r in results], "history": hist},
    )


def read_raw_csv(path) -> dict[str, dict[str, list]]:
    """Raw feature table with columns state_id, circuit_tag, shots, p0_estimate.

    Each row is one SWAP/Hadamard-type circuit whose raw value is 2·p0 − 1.
    """
    out: dict[str, dict[str, list]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            val = 2.0 * float(row["p0_estimate"]) - 1.0
            out.setdefault(row["state_id"], {}).setdefault(row["circuit_tag"], []).append(val)
    return out


def write_raw_csv(path, raw: Mapping, shots: int = 4000) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["state_id", "circuit_tag", "shots", "p0_estimate"])
        for sid, feats in raw.items():
            for tag, vals in feats.items():
                for v in np.atleast_1d(vals):
                    w.writerow([sid, tag, shots, repr(float(0.5 * (1.0 + v)))])


# ------------------------------------------------------ Werner asymmetric

WERNER_F_MU4 = 0.438
WERNER_F_I4 = 0.447
SIGMA_SPECTRAL_SQ = 0.006


@dataclass(frozen=True)
class WernerC4:
    p: float
    raw: float
    calibrated: float
    stderr: float
    theory: float


def werner_asymmetric(p: float, f_mu4: float = WERNER_F_MU4, f_I4: float = WERNER_F_I4,
                      sigma_direct: float = 0.005, sigma_spectral_sq: float = SIGMA_SPECTRAL_SQ) -> WernerC4:
    """Raw and two-point-calibrated C₄ when the μ₄ and I₄ circuits fade differently.

    The calibration maps the raw curve linearly onto the theory values at
    p = 0 and p = 1. ``stderr`` is the raw two-component uncertainty divided
    by the calibration slope. ``sigma_direct`` is an input: the noisy-purity
    reference it derives from is not given as a formula.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"Werner weight must lie in [0, 1], got {p}")
    if not (0.0 < f_mu4 <= 1.0 and 0.0 < f_I4 <= 1.0):
        raise ParameterError("circuit fidelities must lie in (0, 1]")

    def raw(q):
        w = mom.werner_closed_form(q)
        return f_mu4 * w["mu4"] - f_I4 * w["I4"]

    r0, r1 = raw(0.0), raw(1.0)
    thy1 = mom.werner_closed_form(1.0)["C4"]
    scale = (r1 - r0) / thy1
    rp = raw(p)
    lam_s = (1 + 3 * p) / 4
    i2 = (1 + 3 * p * p) / 4
    var = lam_s ** 8 * sigma_direct ** 2 + (i2 ** 4 - lam_s ** 8) * sigma_spectral_sq
    return WernerC4(p, rp, (rp - r0) / scale, math.sqrt(var) / abs(scale), mom.werner_closed_form(p)["C4"])


# -------------------------------------------------------- noise sweep

@dataclass
class SweepRow:
    name: str
    d2_theory: float
    rate: float
    mean_d2: float
    sd_d2: float
    n_trials: int


# hardware-table chessboards C1 and C2, identified on the integer grid by their D₁, D₂
CHESS_C1 = (1, 2, 3, 1, 1, 1)
CHESS_C2 = (1, 1, 2, 1, 1, 3)


def default_sweep_states() -> dict[str, DensityMatrix]:
    """Horodecki a = 0.05..0.95, Tiles ε = 0..0.12, two chessboards and four marginal-noise states."""
    states = {f"horodecki_{a:.2f}": qstate.make_horodecki(a) for a in np.round(np.arange(0.05, 0.951, 0.05), 2)}
    states.update({f"tiles_{e:.2f}": qstate.make_tiles(e) for e in (0.0, 0.03, 0.06, 0.09, 0.12)})
    states["chess_C1"] = qstate.make_chessboard(*CHESS_C1)
    states["chess_C2"] = qstate.make_chessboard(*CHESS_C2)
    for t in (0.05, 0.10):
        states[f"mn_tiles_{t:.2f}"] = qstate.make_marginal_noise(qstate.make_tiles(0.0), t)
        states[f"mn_horodecki_{t:.2f}"] = qstate.make_marginal_noise(qstate.make_horodecki(0.5), t)
    return states


def noise_model_sweep(families: Mapping[str, DensityMatrix] | None = None,
                      fidelities: Mapping[str, float] = FEZ_FIDELITIES,
                      sigmas: Mapping[str, float] = DEFAULT_SIGMAS, n_trials: int = 200,
                      shots: int = 4000, rng_seed: int = 0, restarts: int = 1) -> list[SweepRow]:
    """Per-state rate of D₂^ML > 0 over simulated calibration + test campaigns."""
    if n_trials < 50:
        raise ParameterError(f"need at least 50 trials, got {n_trials}")
    families = default_sweep_states() if families is None else families
    theory = calibration_theory()
    rows = []
    seeds = np.random.SeedSequence(rng_seed).spawn(len(families))
    for (name, rho), seq in zip(families.items(), seeds):
        rng = np.random.default_rng(seq)
        truth = feature_values(rho)
        d2 = np.empty(n_trials)
        for t in range(n_trials):
            cal_raw = simulate_raw_features(theory, fidelities, sigmas, 1, rng, shots)
            test_raw = simulate_raw_features({name: truth}, fidelities, sigmas, 1, rng, shots)
            fit = per_circuit_mle(cal_raw, test_raw, theory, sigmas, restarts, int(rng.integers(2 ** 31)),
                                  with_errors=False)
            d2[t] = fit.physical_features[name]["D2"]
        rows.append(SweepRow(name, truth["S2"] - truth["G2"], float(np.mean(d2 > DETECT_TOL)),
                             float(d2.mean()), float(d2.std(ddof=1)), n_trials))
    return rows
