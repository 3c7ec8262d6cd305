"""Power sums, elementary symmetric polynomials, and polynomial roots."""

from __future__ import annotations

import numpy as np


def elementary_from_power_sums(p) -> np.ndarray:
    """Newton's identities: power sums p_1..p_n -> e_0..e_n.

    k·e_k = Σ_{i=1..k} (-1)^(i-1) e_{k-i} p_i.
    """
    p = np.asarray(p)
    n = p.size
    e = np.zeros(n + 1, dtype=p.dtype if np.iscomplexobj(p) else float)
    e[0] = 1.0
    for k in range(1, n + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i - 1]
        e[k] = acc / k
    return e


def power_sums_from_elementary(e, kmax: int) -> np.ndarray:
    """Inverse of :func:`elementary_from_power_sums` (e_j = 0 for j > n)."""
    e = np.asarray(e)
    n = e.size - 1
    p = np.zeros(kmax, dtype=complex if np.iscomplexobj(e) else float)
    for k in range(1, kmax + 1):
        acc = (-1) ** (k - 1) * k * e[k] if k <= n else 0.0
        for i in range(1, k):
            if k - i <= n:
                acc += (-1) ** (k - i - 1) * e[k - i] * p[i - 1]
        p[k - 1] = acc
    return p


def charpoly_from_elementary(e) -> np.ndarray:
    """Monic coefficients (highest first) of Π(x - λ_i) = Σ (-1)^k e_k x^(n-k)."""
    e = np.asarray(e)
    signs = (-1.0) ** np.arange(e.size)
    return signs * e


def durand_kerner(coeffs, max_iter: int = 200, tol: float = 1e-12) -> np.ndarray:
    """All complex roots of a polynomial given highest-degree-first coefficients.

    Simultaneous Weierstrass iteration from points on a circle whose radius
    bounds the roots (Cauchy bound).  Stops when every update is below ``tol``
    relative to the root scale, or after ``max_iter`` sweeps.
    """
    c = np.asarray(coeffs, dtype=complex)
    c = c / c[0]
    n = c.size - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return np.array([-c[1]])
    radius = 1.0 + np.max(np.abs(c[1:]))
    # the offset angle keeps starting points off the real axis and away from symmetric lines
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    for _ in range(max_iter):
        num = np.polyval(c, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        den = np.prod(diff, axis=1)
        step = num / den
        z = z - step
        if np.max(np.abs(step)) <= tol * max(1.0, np.max(np.abs(z))):
            break
    # one Newton polish per root against the undeflated polynomial
    dc = np.polyder(c)
    for _ in range(2):
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.polyval(dc, z)
            upd = np.where(np.abs(d) > 1e-300, np.polyval(c, z) / d, 0.0)
        upd = np.where(np.isfinite(upd) & (np.abs(upd) < 1e-6), upd, 0.0)
        z = z - upd
    return z


def cluster_roots(roots, tol: float = 1e-7, noise: float = 1e-13) -> np.ndarray:
    """Replace groups of nearly equal roots by their mean (multiplicity kept).

    A perturbed root of multiplicity m spreads over a circle of radius about
    noise^(1/m), so a group of m roots is accepted when it fits inside
    max(tol, noise^(1/m)) of its centroid.  Larger groups are tried first.
    The mean of a group is well conditioned even when its members are not.
    """
    r = np.array(roots, dtype=complex)
    free = list(range(r.size))
    out = r.copy()
    for m in range(r.size, 1, -1):
        lim = max(tol, noise ** (1.0 / m))
        changed = True
        while changed and len(free) >= m:
            changed = False
            for i in free:
                nearest = sorted(free, key=lambda j: abs(r[j] - r[i]))[:m]
                c = r[nearest].mean()
                if np.max(np.abs(r[nearest] - c)) < lim:
                    out[nearest] = c
                    free = [j for j in free if j not in nearest]
                    changed = True
                    break
    return out
