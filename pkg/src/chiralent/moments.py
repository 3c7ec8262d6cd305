"""Moment calculus for bipartite states.

PT moments μ_k = Tr[(ρ^{T_A})^k], purity moments I_k = Tr[ρ^k] and the
chirality corrections C_k = μ_k − I_k; realignment moments Σ_k, G_k, D_k and
their partial-transpose counterparts; spectrum reconstruction from moments;
closed-form relations for pure, Werner and two-qubit states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import spectral
from .errors import ContractError, DomainError, InconsistentMomentsError, ParameterError
from .poly import (
    charpoly_from_elementary,
    cluster_roots,
    durand_kerner,
    elementary_from_power_sums,
    power_sums_from_elementary,
)
from .qstate import BipartiteDims, DensityMatrix

UNDEFINED = float("nan")
K_REALIGN = 9


@dataclass(frozen=True)
class MomentSet:
    """μ_k and I_k for k = 1..k_max (index 0 holds k = 1)."""

    dims: BipartiteDims
    mu: np.ndarray
    purity: np.ndarray

    @property
    def k_max(self) -> int:
        return self.mu.size

    def mu_k(self, k: int) -> float:
        return float(self.mu[k - 1])

    def i_k(self, k: int) -> float:
        return float(self.purity[k - 1])

    def c_k(self, k: int) -> float:
        return float(self.mu[k - 1] - self.purity[k - 1])


def _hermitian_trace_powers(M, kmax: int) -> np.ndarray:
    t = spectral.trace_powers(M, kmax)
    return t.real


def compute_moments(rho: DensityMatrix, k_max: int | None = None) -> MomentSet:
    d = rho.dims.total
    k_max = d if k_max is None else k_max
    if not 2 <= k_max:
        raise ParameterError(f"k_max must be >= 2, got {k_max}")
    pt = spectral.partial_transpose(rho, "A")
    return MomentSet(rho.dims, _hermitian_trace_powers(pt, k_max), _hermitian_trace_powers(rho.data, k_max))


def chirality(rho: DensityMatrix, k: int) -> float:
    """C_k = Tr[(ρ^{T_A})^k] − Tr[ρ^k]."""
    return compute_moments(rho, max(k, 2)).c_k(k)


# ------------------------------------------------------------ realignment

@dataclass(frozen=True)
class RealignMomentSet:
    sigma: np.ndarray
    g: np.ndarray
    d_gap: np.ndarray
    sp: np.ndarray
    gp: np.ndarray
    dp: np.ndarray
    delta_g2: float
    ratios: dict = field(default_factory=dict)


def _safe_div(a: float, b: float, tol: float = 1e-15) -> float:
    return a / b if abs(b) > tol else UNDEFINED


def compute_realign_moments(rho: DensityMatrix, k_max: int = K_REALIGN) -> RealignMomentSet:
    R = spectral.realign(rho)
    Rp = spectral.realign(spectral.partial_transpose(rho, "A"), rho.dims)
    ks = np.arange(1, k_max + 1)
    sv = spectral.singular_values(R)
    svp = spectral.singular_values(Rp)
    sigma = np.array([np.sum(sv ** k) for k in ks])
    sp = np.array([np.sum(svp ** k) for k in ks])
    if rho.d_a == rho.d_b:
        gc = spectral.trace_powers(R, k_max)
        if rho.is_real() and np.max(np.abs(gc.imag)) >= 1e-8:
            raise ContractError(f"Im Tr[R^k] = {np.max(np.abs(gc.imag)):.2e} for a real state")
        g = gc.real
        gp = spectral.trace_powers(Rp, k_max).real
    else:
        g = np.full(k_max, UNDEFINED)
        gp = np.full(k_max, UNDEFINED)
    S = lambda k: sigma[k - 1]  # noqa: E731
    G = lambda k: g[k - 1]  # noqa: E731
    ratios = {}
    if k_max >= 6:
        ratios["S2S6_S4sq"] = _safe_div(S(2) * S(6), S(4) ** 2)
        ratios["G2G6_G4sq"] = _safe_div(G(2) * G(6), G(4) ** 2)
    if k_max >= 4:
        ratios["S2sq_S4"] = _safe_div(S(2) ** 2, S(4))
        ratios["SP2sq_SP4"] = _safe_div(sp[1] ** 2, sp[3])
        ratios["Q2"] = _safe_div(G(2), S(2))
        ratios["Q4"] = _safe_div(G(4), S(4))
        ratios["QP2"] = _safe_div(gp[1], sp[1])
        ratios["QP4"] = _safe_div(gp[3], sp[3])
        ratios["dQ2"] = ratios["Q2"] - ratios["QP2"]
    return RealignMomentSet(
        sigma=sigma, g=g, d_gap=sigma - g, sp=sp, gp=gp, dp=sp - gp,
        delta_g2=float(g[1] - gp[1]) if k_max >= 2 else UNDEFINED, ratios=ratios,
    )


def delta_g(rho: DensityMatrix, k: int) -> float:
    """δG_k = Re Tr[R(ρ)^k] − Re Tr[R(ρ^{T_A})^k]."""
    R = spectral.realign(rho)
    Rp = spectral.realign(spectral.partial_transpose(rho, "A"), rho.dims)
    return spectral.trace_power(R, k).real - spectral.trace_power(Rp, k).real


# ------------------------------------------------------- reconstruction

def quartic_roots(e) -> np.ndarray:
    """Roots of x⁴ − e1x³ + e2x² − e3x + e4 by Ferrari's resolvent cubic."""
    e1, e2, e3, e4 = (complex(x) for x in e[1:5])
    # x = y + e1/4 gives y⁴ + p y² + q y + r
    a, b, c, d = -e1, e2, -e3, e4
    p = b - 3 * a * a / 8
    q = c - a * b / 2 + a ** 3 / 8
    r = d - a * c / 4 + a * a * b / 16 - 3 * a ** 4 / 256
    shift = -a / 4
    if abs(q) < 1e-14:
        # biquadratic: y² = (−p ± √(p² − 4r)) / 2
        disc = np.sqrt(p * p - 4 * r + 0j)
        ys = []
        for s2 in ((-p + disc) / 2, (-p - disc) / 2):
            rt = np.sqrt(s2 + 0j)
            ys += [rt, -rt]
        return np.array(ys) + shift
    # resolvent: 8m³ + 8p m² + (2p² − 8r) m − q² = 0, pick a root with m != 0
    m_roots = _cubic_roots(8.0, 8 * p, 2 * p * p - 8 * r, -q * q)
    m = m_roots[np.argmax(np.abs(m_roots))]
    s = np.sqrt(2 * m + 0j)
    ys = []
    for sign in (1, -1):
        inner = np.sqrt(-(2 * p + 2 * m + sign * 2 * q / s) + 0j)
        ys += [(sign * s + inner) / 2, (sign * s - inner) / 2]
    return np.array(ys) + shift


def _cubic_roots(a, b, c, d) -> np.ndarray:
    """Cardano for a x³ + b x² + c x + d with complex arithmetic."""
    b, c, d = b / a, c / a, d / a
    p = c - b * b / 3
    q = 2 * b ** 3 / 27 - b * c / 3 + d
    shift = -b / 3
    if abs(p) < 1e-300 and abs(q) < 1e-300:
        return np.array([shift] * 3, dtype=complex)
    disc = np.sqrt((q / 2) ** 2 + (p / 3) ** 3 + 0j)
    u3 = -q / 2 + disc
    if abs(u3) < 1e-300:
        u3 = -q / 2 - disc
    u = u3 ** (1 / 3)
    omega = np.exp(2j * np.pi / 3)
    roots = []
    for k in range(3):
        uk = u * omega ** k
        roots.append(uk - p / (3 * uk) + shift)
    return np.array(roots)


class RootMethod(str, Enum):
    AUTO = "auto"
    FERRARI = "ferrari"
    DURAND_KERNER = "durand_kerner"


def newton_girard_coefficients(mu) -> np.ndarray:
    """e_0..e_n from power sums μ_1..μ_n (μ_1 may be supplied as 1)."""
    return elementary_from_power_sums(np.asarray(mu, dtype=float))


def spectrum_from_power_sums(p, method: RootMethod | str = RootMethod.AUTO,
                             residual_tol: float = 1e-6, cluster_tol: float = 1e-7) -> np.ndarray:
    """Real spectrum (descending) whose power sums are ``p`` = [p_1..p_n]."""
    p = np.asarray(p, dtype=float)
    n = p.size
    e = elementary_from_power_sums(p)
    method = RootMethod(method)
    if method is RootMethod.AUTO:
        method = RootMethod.FERRARI if n == 4 else RootMethod.DURAND_KERNER
    if method is RootMethod.FERRARI:
        if n != 4:
            raise ParameterError("Ferrari route needs exactly four eigenvalues")
        roots = quartic_roots(e)
    else:
        roots = durand_kerner(charpoly_from_elementary(e))
    roots = cluster_roots(roots, cluster_tol)
    lam = np.sort(roots.real)[::-1]
    recon = power_sums_from_elementary(elementary_from_power_sums(np.array([np.sum(lam ** k) for k in range(1, n + 1)])), n)
    resid = np.max(np.abs(recon - p))
    if resid > residual_tol:
        raise InconsistentMomentsError(f"reconstructed power sums deviate by {resid:.2e}")
    return lam


def newton_girard_spectrum(moments: MomentSet, method: RootMethod | str = RootMethod.AUTO) -> np.ndarray:
    """Partial-transpose spectrum from μ_2..μ_d (μ_1 = 1)."""
    d = moments.dims.total
    if moments.k_max < d:
        raise InconsistentMomentsError(f"need moments up to k = {d}, have {moments.k_max}")
    p = np.array(moments.mu[:d], dtype=float)
    p[0] = 1.0
    lam = spectrum_from_power_sums(p, method)
    if abs(lam.sum() - 1.0) > 1e-8:
        raise InconsistentMomentsError(f"reconstructed spectrum sums to {lam.sum():.10f}")
    return lam


class NegMethod(str, Enum):
    DIRECT = "Direct"
    NEWTON_GIRARD = "NewtonGirard"


@dataclass(frozen=True)
class NegativityResult:
    negativity: float
    pt_spectrum: np.ndarray
    method: NegMethod


def negativity_from_spectrum(lam) -> float:
    lam = np.asarray(lam, dtype=float)
    return float(-lam[lam < 0].sum())


def negativity(rho: DensityMatrix, method: NegMethod | str = NegMethod.DIRECT) -> NegativityResult:
    method = NegMethod(method)
    if method is NegMethod.DIRECT:
        lam = spectral.herm_eigvals(spectral.partial_transpose(rho, "A"))
    else:
        lam = newton_girard_spectrum(compute_moments(rho, rho.dims.total))
    return NegativityResult(negativity_from_spectrum(lam), lam, method)


# ----------------------------------------------------------- closed forms

def c4_from_negativity(N: float) -> float:
    """Pure two-qubit relation C₄ = −4N²(1 − N²)."""
    if not 0.0 <= N <= 0.5 + 1e-12:
        raise DomainError(f"pure two-qubit negativity lies in [0, 1/2], got {N}")
    return -4 * N * N * (1 - N * N)


def negativity_from_c4(c4: float) -> float:
    """Inverse branch N = √((1 − √(1 + C₄)) / 2) for C₄ ∈ [−3/4, 0]."""
    if not -0.75 - 1e-12 <= c4 <= 1e-15:
        raise DomainError(f"C4 must lie in [-3/4, 0] on the pure branch, got {c4}")
    c4 = min(max(c4, -0.75), 0.0)
    return math.sqrt(max(0.0, (1 - math.sqrt(1 + c4)) / 2))


def c3_from_negativity(N: float) -> float:
    """Pure two-qubit relation C₃ = −3N²."""
    if not 0.0 <= N <= 0.5 + 1e-12:
        raise DomainError(f"pure two-qubit negativity lies in [0, 1/2], got {N}")
    return -3 * N * N


def pure_theta_moments(theta: float) -> dict[str, float]:
    """Ideal PT moments of cos(θ/2)|00> + sin(θ/2)|11>."""
    c2 = math.cos(theta) ** 2
    return {"mu2": 1.0, "mu3": (1 + 3 * c2) / 4, "mu4": (1 + c2) ** 2 / 4, "negativity": abs(math.sin(theta)) / 2}


def werner_closed_form(p: float) -> dict[str, float]:
    """Moments of p|Ψ-><Ψ-| + (1-p)I/4 from its spectra."""
    I4 = ((1 + 3 * p) ** 4 + 3 * (1 - p) ** 4) / 256
    mu4 = (3 * (1 + p) ** 4 + (1 - 3 * p) ** 4) / 256
    return {
        "I2": (1 + 3 * p * p) / 4,
        "I4": I4,
        "mu4": mu4,
        "C4": -0.75 * p ** 3,
        "negativity": max(0.0, (3 * p - 1) / 4),
        "detT": -p ** 3,
    }


def c4_dett_residual(rho: DensityMatrix) -> float:
    """C₄ − (3/4)·det(T) for a two-qubit state."""
    f = spectral.fano_decompose(rho)
    return chirality(rho, 4) - 0.75 * float(np.linalg.det(f.T))


SEPARABLE_C3_BOUND = 1 / 36
SEPARABLE_C4_BOUND = 1 / 27
