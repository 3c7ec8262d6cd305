"""Separability certification: closest separable state and product-vector gap."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import spectral
from .errors import ParameterError
from .qstate import DensityMatrix

# ------------------------------------------------------------ Carathéodory


@dataclass(frozen=True)
class Budget:
    restarts: int = 10
    steps_per_phase: tuple = (500, 500, 500)
    learning_rates: tuple = (0.01, 0.003, 0.001)
    jitter: float = 0.02
    seed: int = 0
    polish_iters: int = 3000

    def __post_init__(self):
        if self.restarts < 1 or min(self.steps_per_phase) < 1 or min(self.learning_rates) <= 0:
            raise ParameterError("budget fields must be positive")
        if len(self.steps_per_phase) != len(self.learning_rates):
            raise ParameterError("one learning rate per phase is required")


DESK_BUDGET = Budget()
PAPER_BUDGET = Budget(restarts=50, steps_per_phase=(2000, 3000, 5000))


@dataclass
class SeparableDecomposition:
    K: int
    weights: np.ndarray
    product_vectors: list
    d_f: float
    history: list = field(default_factory=list)

    def matrix(self) -> np.ndarray:
        d = self.product_vectors[0][0].size * self.product_vectors[0][1].size
        out = np.zeros((d, d), dtype=complex)
        for p, (a, b) in zip(self.weights, self.product_vectors):
            v = np.kron(a, b)
            out += p * np.outer(v, v.conj())
        return out


def _softmax(w):
    e = np.exp(w - w.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grad(rho: np.ndarray, w, va, vb):
    """‖σ − ρ‖_F² and its gradients for a batch of restarts.

    Shapes: w (R, K) real logits; va (R, K, d_a), vb (R, K, d_b) complex,
    unnormalized.  Complex gradients are returned as ∂L/∂Re + i ∂L/∂Im.
    """
    na = np.linalg.norm(va, axis=-1, keepdims=True)
    nb = np.linalg.norm(vb, axis=-1, keepdims=True)
    a, b = va / na, vb / nb
    p = _softmax(w)
    R, K, da = a.shape
    db = b.shape[-1]
    psi = (a[..., :, None] * b[..., None, :]).reshape(R, K, da * db)
    sig = np.einsum("rk,rki,rkj->rij", p, psi, psi.conj())
    E = sig - rho
    L = np.einsum("rij,rji->r", E, E).real
    Epsi = np.einsum("rij,rkj->rki", E, psi)
    gp = 2 * np.einsum("rki,rki->rk", psi.conj(), Epsi).real
    gw = p * (gp - (p * gp).sum(-1, keepdims=True))
    G = (4 * p[..., None] * Epsi).reshape(R, K, da, db)
    ga = np.einsum("rkij,rkj->rki", G, b.conj())
    gb = np.einsum("rkij,rki->rkj", G, a.conj())
    gva = (ga - a * np.sum(a.conj() * ga, -1, keepdims=True).real) / na
    gvb = (gb - b * np.sum(b.conj() * gb, -1, keepdims=True).real) / nb
    return L, gw, gva, gvb


def finite_difference_check(rho: np.ndarray, dims, K: int, rng_seed: int = 0, h: float = 1e-6) -> float:
    """Max relative error between analytic and central-difference gradients at a random point."""
    rng = np.random.default_rng(rng_seed)
    da, db = dims
    c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)  # noqa: E731
    w, va, vb = rng.standard_normal((1, K)), c(1, K, da), c(1, K, db)
    _, gw, gva, gvb = loss_and_grad(rho, w, va, vb)
    errs = []

    def rel(fd, an):
        return abs(fd - an) / max(abs(fd), abs(an), 1e-8)

    for idx in np.ndindex(*w.shape):
        wp, wm = w.copy(), w.copy()
        wp[idx] += h
        wm[idx] -= h
        fd = (loss_and_grad(rho, wp, va, vb)[0][0] - loss_and_grad(rho, wm, va, vb)[0][0]) / (2 * h)
        errs.append(rel(fd, gw[idx]))
    for arr, g, which in ((va, gva, 0), (vb, gvb, 1)):
        for idx in np.ndindex(*arr.shape):
            for unit, part in ((1.0, g[idx].real), (1j, g[idx].imag)):
                ap, am = arr.copy(), arr.copy()
                ap[idx] += h * unit
                am[idx] -= h * unit
                args_p = (w, ap, vb) if which == 0 else (w, va, ap)
                args_m = (w, am, vb) if which == 0 else (w, va, am)
                fd = (loss_and_grad(rho, *args_p)[0][0] - loss_and_grad(rho, *args_m)[0][0]) / (2 * h)
                errs.append(rel(fd, part))
    return float(max(errs))


class _Adam:
    """Adam with separate second moments for real and imaginary parts."""

    def __init__(self, shapes_dtypes, b1=0.9, b2=0.999, eps=1e-8):
        self.b1, self.b2, self.eps = b1, b2, eps
        self.m = [np.zeros(s, dtype=t) for s, t in shapes_dtypes]
        self.v = [np.zeros(s, dtype=t) for s, t in shapes_dtypes]
        self.t = 0

    def step(self, params, grads, lr):
        self.t += 1
        out = []
        for j, (x, g) in enumerate(zip(params, grads)):
            self.m[j] = self.b1 * self.m[j] + (1 - self.b1) * g
            if np.iscomplexobj(g):
                sq = g.real ** 2 + 1j * g.imag ** 2
            else:
                sq = g * g
            self.v[j] = self.b2 * self.v[j] + (1 - self.b2) * sq
            mh = self.m[j] / (1 - self.b1 ** self.t)
            vh = self.v[j] / (1 - self.b2 ** self.t)
            if np.iscomplexobj(g):
                upd = mh.real / (np.sqrt(vh.real) + self.eps) + 1j * mh.imag / (np.sqrt(vh.imag) + self.eps)
            else:
                upd = mh / (np.sqrt(vh) + self.eps)
            out.append(x - lr * upd)
        return out


def _cosine(lr, t, steps):
    lo = lr / 100
    return lo + 0.5 * (lr - lo) * (1 + np.cos(np.pi * t / steps))


def _polish(m, best, best_L, maxiter):
    """Quasi-Newton refinement of the incumbent on the same analytic gradient."""
    bw, ba, bb = best
    K, da = ba.shape
    db = bb.shape[1]
    sizes = np.cumsum([K, K * da, K * da, K * db])

    def unpack(x):
        w, ar, ai, br, bi = np.split(x, sizes)
        return (w[None], (ar + 1j * ai).reshape(1, K, da), (br + 1j * bi).reshape(1, K, db))

    def fun(x):
        L, gw, ga, gb = loss_and_grad(m, *unpack(x))
        return L[0], np.concatenate([gw[0], ga[0].real.ravel(), ga[0].imag.ravel(),
                                     gb[0].real.ravel(), gb[0].imag.ravel()])

    x0 = np.concatenate([bw, ba.real.ravel(), ba.imag.ravel(), bb.real.ravel(), bb.imag.ravel()])
    res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "gtol": 1e-14, "ftol": 1e-16})
    if res.fun < best_L:
        w, a, b = unpack(res.x)
        return float(res.fun), (w[0], a[0], b[0])
    return best_L, best


def caratheodory_fit(rho, K: int, budget: Budget = DESK_BUDGET, init: SeparableDecomposition | None = None,
                     dims=None) -> SeparableDecomposition:
    """Closest separable state with at most K product terms (local search + restarts)."""
    m, bd = spectral._unpack(rho, dims)
    if K < 1:
        raise ParameterError("K must be >= 1")
    da, db = bd.d_a, bd.d_b
    rng = np.random.default_rng(budget.seed)
    R = budget.restarts
    c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)  # noqa: E731
    w = 0.1 * rng.standard_normal((R, K))
    va, vb = c(R, K, da), c(R, K, db)
    if init is not None:
        k0 = min(init.K, K)
        w[0] = -30.0  # unused terms start with negligible weight
        w[0, :k0] = np.log(np.maximum(init.weights[:k0], 1e-300))
        for k in range(k0):
            va[0, k], vb[0, k] = init.product_vectors[k]
    best_L, best = np.inf, None

    def consider(L, params):
        nonlocal best_L, best
        i = int(np.argmin(L))
        if L[i] < best_L:
            best_L = float(L[i])
            best = tuple(x[i].copy() for x in params)

    consider(loss_and_grad(m, w, va, vb)[0], (w, va, vb))
    history = []
    for phase, (steps, lr) in enumerate(zip(budget.steps_per_phase, budget.learning_rates)):
        if phase:
            # restart every chain from the incumbent; chain 0 stays unperturbed
            bw, ba, bb = best
            mask = np.r_[0.0, np.ones(R - 1)]
            s = budget.jitter
            w = bw[None] + s * rng.standard_normal((R, K)) * mask[:, None]
            va = ba[None] + s * c(R, K, da) * mask[:, None, None]
            vb = bb[None] + s * c(R, K, db) * mask[:, None, None]
        opt = _Adam([(w.shape, float), (va.shape, complex), (vb.shape, complex)])
        for t in range(steps):
            L, gw, gva, gvb = loss_and_grad(m, w, va, vb)
            consider(L, (w, va, vb))
            w, va, vb = opt.step((w, va, vb), (gw, gva, gvb), _cosine(lr, t, steps))
        consider(loss_and_grad(m, w, va, vb)[0], (w, va, vb))
        history.append(float(np.sqrt(best_L)))
    if budget.polish_iters:
        best_L, best = _polish(m, best, best_L, budget.polish_iters)
        history.append(float(np.sqrt(best_L)))
    bw, ba, bb = best
    p = _softmax(bw[None])[0]
    vecs = [(ba[k] / np.linalg.norm(ba[k]), bb[k] / np.linalg.norm(bb[k])) for k in range(K)]
    return SeparableDecomposition(K, p, vecs, float(np.sqrt(max(best_L, 0.0))), history)


def caratheodory_path(rho, Ks, budget: Budget = DESK_BUDGET) -> list[SeparableDecomposition]:
    """Fits for increasing K, each warm-started from the previous one (d_f non-increasing)."""
    out, prev = [], None
    for K in sorted(Ks):
        prev = caratheodory_fit(rho, K, budget, init=prev)
        out.append(prev)
    return out


# ----------------------------------------------------- product-vector gap


@dataclass
class PvGapResult:
    gap: float
    argmin_pair: tuple
    method: str
    condition_number: float = float("nan")
    restart_gaps: np.ndarray | None = None
    min_separation: float = float("nan")


def range_projector(rho, rank_tol: float = 1e-8, dims=None) -> np.ndarray:
    m, _ = spectral._unpack(rho, dims)
    lam, V = spectral.herm_eigvals(m, vectors=True)
    U = V[:, lam > rank_tol]
    return U @ U.conj().T


def _alternate(Q4: np.ndarray, a: np.ndarray, b: np.ndarray, iters: int, tol: float):
    """Batched alternating top-eigenvector ascent of <a,b|Q|a,b> for Hermitian Q."""
    prev = None
    for _ in range(iters):
        Ma = np.einsum("rj,ijkl,rl->rik", b.conj(), Q4, b)
        _, va = np.linalg.eigh(0.5 * (Ma + np.conj(np.swapaxes(Ma, 1, 2))))
        a = va[:, :, -1]
        Mb = np.einsum("ri,ijkl,rk->rjl", a.conj(), Q4, a)
        wb, vb = np.linalg.eigh(0.5 * (Mb + np.conj(np.swapaxes(Mb, 1, 2))))
        b = vb[:, :, -1]
        val = wb[:, -1]
        if prev is not None and np.max(np.abs(val - prev)) < tol:
            break
        prev = val
    return a, b, val


def pv_gap_direct(rho, rank_tol: float = 1e-8, restarts: int = 32, iters: int = 500, rng_seed: int = 0,
                  tol: float = 1e-14, dims=None) -> PvGapResult:
    """1 − max_{a,b} <a,b|P_range|a,b> by alternating eigenvector updates."""
    m, bd = spectral._unpack(rho, dims)
    P = range_projector(m, rank_tol, bd)
    Q4 = P.reshape(bd.d_a, bd.d_b, bd.d_a, bd.d_b)
    rng = np.random.default_rng(rng_seed)
    b = rng.standard_normal((restarts, bd.d_b)) + 1j * rng.standard_normal((restarts, bd.d_b))
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    a = np.zeros((restarts, bd.d_a), dtype=complex)
    a, b, val = _alternate(Q4, a, b, iters, tol)
    gaps = 1.0 - val
    i = int(np.argmin(gaps))
    return PvGapResult(float(gaps[i]), (a[i], b[i]), "Direct", restart_gaps=gaps)


def augmented_moment(rho, a, b, k: int, dims=None) -> float:
    """Tr[ρ^k |a,b><a,b|] by matrix powers."""
    m, _ = spectral._unpack(rho, dims)
    v = np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    Mk = np.linalg.matrix_power(m, k)
    return float(np.vdot(v, Mk @ v).real)


def _gauss_solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting after unit-norm column scaling."""
    A = np.array(A, dtype=float)
    x_scale = np.linalg.norm(A, axis=0)
    x_scale[x_scale == 0] = 1.0
    A = A / x_scale
    rhs = np.array(rhs, dtype=float)
    n = A.shape[0]
    M = np.hstack([A, rhs.reshape(n, -1)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(M[col:, col])))
        if M[piv, col] == 0:
            raise np.linalg.LinAlgError("singular Vandermonde system")
        M[[col, piv]] = M[[piv, col]]
        M[col + 1:] -= np.outer(M[col + 1:, col] / M[col, col], M[col])
    x = np.zeros((n, M.shape[1] - n))
    for row in range(n - 1, -1, -1):
        x[row] = (M[row, n:] - M[row, row + 1:n] @ x[row + 1:]) / M[row, row]
    return (x / x_scale[:, None]).reshape(rhs.shape)


def vandermonde_matrix(lam) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    return np.vstack([lam ** k for k in range(1, lam.size + 1)])


def _solve_vandermonde(V, rhs, kappa):
    if kappa > 1e12:
        warnings.warn(f"Vandermonde system is ill-conditioned (kappa = {kappa:.1e})", RuntimeWarning, stacklevel=3)
    if kappa > 1e10:
        ridge = 1e-12 * np.linalg.norm(V, 2) ** 2
        return np.linalg.solve(V.T @ V + ridge * np.eye(V.shape[1]), V.T @ rhs)
    return _gauss_solve(V, rhs)


def vandermonde_gap(eigenvalues, moments) -> tuple[float, float]:
    """Overlaps from V p = m with V_{k,i} = λ_i^k; returns (1 − Σp, κ(V))."""
    lam = np.asarray(eigenvalues, dtype=float)
    mom = np.asarray(moments, dtype=float)
    if lam.size != mom.size:
        raise ParameterError("need one augmented moment per distinct eigenvalue")
    V = vandermonde_matrix(lam)
    sv = np.linalg.svd(V, compute_uv=False)
    kappa = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    p = _solve_vandermonde(V, mom, kappa)
    return float(1.0 - p.sum()), kappa


def distinct_nonzero_eigenvalues(rho, rank_tol: float = 1e-8, merge_tol: float = 1e-9, dims=None):
    m, _ = spectral._unpack(rho, dims)
    lam = spectral.herm_eigvals(m)
    lam = lam[lam > rank_tol]
    groups = [[lam[0]]]
    for x in lam[1:]:
        if abs(groups[-1][-1] - x) < merge_tol:
            groups[-1].append(x)
        else:
            groups.append([x])
    vals = np.array([np.mean(g) for g in groups])
    sep = float(np.min(np.abs(np.diff(vals)))) if vals.size > 1 else float("inf")
    return vals, sep


def pv_gap_vandermonde(rho, rank_tol: float = 1e-8, restarts: int = 32, iters: int = 500, rng_seed: int = 0,
                       dims=None) -> PvGapResult:
    """Product-vector gap using only the spectrum and augmented moments.

    The range projector is the polynomial Σ_k c_k ρ^k with Vᵀc = 1, so the
    search runs on that operator and the final gap is re-evaluated from the
    augmented moments at the optimum through the Vandermonde inversion.
    """
    m, bd = spectral._unpack(rho, dims)
    lam, sep = distinct_nonzero_eigenvalues(m, rank_tol, dims=bd)
    V = vandermonde_matrix(lam)
    sv = np.linalg.svd(V, compute_uv=False)
    kappa = float(sv[0] / sv[-1])
    coef = _solve_vandermonde(V.T, np.ones(lam.size), kappa)
    Q = sum(ck * np.linalg.matrix_power(m, k + 1) for k, ck in enumerate(coef))
    Q = 0.5 * (Q + Q.conj().T)
    Q4 = Q.reshape(bd.d_a, bd.d_b, bd.d_a, bd.d_b)
    rng = np.random.default_rng(rng_seed)
    b = rng.standard_normal((restarts, bd.d_b)) + 1j * rng.standard_normal((restarts, bd.d_b))
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    a, b, val = _alternate(Q4, np.zeros((restarts, bd.d_a), dtype=complex), b, iters, 1e-14)
    i = int(np.argmax(val))
    moms = [augmented_moment(m, a[i], b[i], k, bd) for k in range(1, lam.size + 1)]
    gap, kappa = vandermonde_gap(lam, moms)
    return PvGapResult(gap, (a[i], b[i]), "Vandermonde", kappa, 1.0 - val, sep)


# --------------------------------------------------------------- verdicts

SEP_DF_TOL = 1e-3
GAP_TOL = 1e-6
NPT_TOL = -1e-9


@dataclass
class CertificationReport:
    state_id: str
    d_f: float
    K: int
    gap_direct: float
    gap_vandermonde: float
    kappa: float
    min_pt_eigenvalue: float
    verdict: str

    def to_json(self) -> str:
        return json.dumps(self.__dict__)


def verdict(min_pt_eig: float, d_f: float, gap: float) -> str:
    """NPT if the partial transpose is negative; SEP if a close separable state exists and the
    range holds product vectors; otherwise BE-candidate."""
    if min_pt_eig < NPT_TOL:
        return "NPT"
    if d_f < SEP_DF_TOL and gap < GAP_TOL:
        return "SEP"
    return "BE-candidate"


def certify(rho: DensityMatrix, state_id: str = "", K: int | None = None, budget: Budget = DESK_BUDGET,
            with_vandermonde: bool = True) -> CertificationReport:
    lam_pt = spectral.herm_eigvals(spectral.partial_transpose(rho, "A"))
    K = rho.dims.total * 2 if K is None else K
    dec = caratheodory_fit(rho, K, budget)
    g = pv_gap_direct(rho)
    gv, kappa = float("nan"), float("nan")
    if with_vandermonde:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = pv_gap_vandermonde(rho)
        gv, kappa = res.gap, res.condition_number
    return CertificationReport(state_id, dec.d_f, K, g.gap, gv, kappa, float(lam_pt[-1]),
                               verdict(float(lam_pt[-1]), dec.d_f, g.gap))
