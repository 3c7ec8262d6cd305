"""Dense linear algebra on small bipartite operators.

Functions accept either a :class:`~chiralent.qstate.DensityMatrix` or a raw
square array together with ``dims``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError, NotApplicableError, ParameterError
from .qstate import BipartiteDims, DensityMatrix, PAULI, as_dims, fano_matrix
from .poly import charpoly_from_elementary, durand_kerner, elementary_from_power_sums


def _unpack(rho, dims=None) -> tuple[np.ndarray, BipartiteDims]:
    if isinstance(rho, DensityMatrix):
        return rho.data, rho.dims
    if dims is None:
        raise DimensionError("raw arrays need explicit dims")
    return np.asarray(rho, dtype=complex), as_dims(dims)


def partial_transpose(rho, subsystem: str = "A", dims=None) -> np.ndarray:
    """Transpose the indices of one subsystem.

    For ``'A'``: (ρ^{T_A})_{(i,j),(k,l)} = ρ_{(k,j),(i,l)}.
    """
    m, dims = _unpack(rho, dims)
    t = m.reshape(dims.d_a, dims.d_b, dims.d_a, dims.d_b)
    if subsystem == "A":
        t = t.transpose(2, 1, 0, 3)
    elif subsystem == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ParameterError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return t.reshape(dims.total, dims.total)


def realign(rho, dims=None) -> np.ndarray:
    """Realignment matrix R[(i,k),(j,l)] = ρ[(i,j),(k,l)], shape d_a² × d_b²."""
    m, dims = _unpack(rho, dims)
    t = m.reshape(dims.d_a, dims.d_b, dims.d_a, dims.d_b)
    return t.transpose(0, 2, 1, 3).reshape(dims.d_a ** 2, dims.d_b ** 2)


def herm_eigvals(M, hermitian_tol: float = 1e-8, vectors: bool = False):
    """Eigenvalues of a Hermitian matrix in descending order.

    With ``vectors=True`` returns ``(values, columns)`` with matching order.
    """
    M = np.asarray(M)
    dev = np.max(np.abs(M - M.conj().T)) if M.size else 0.0
    if dev >= hermitian_tol:
        raise ContractError(f"matrix is not Hermitian (max deviation {dev:.2e})")
    H = 0.5 * (M + M.conj().T)
    if vectors:
        w, v = np.linalg.eigh(H)
        return w[::-1], v[:, ::-1]
    return np.linalg.eigvalsh(H)[::-1]


def singular_values(M) -> np.ndarray:
    """Nonnegative singular values, descending."""
    return np.linalg.svd(np.asarray(M), compute_uv=False)


def trace_power(M, k: int) -> complex:
    """Tr[M^k] by repeated squaring."""
    if not 1 <= k <= 9:
        raise ParameterError(f"trace power order must be in 1..9, got {k}")
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("trace_power needs a square matrix")
    result = None
    base = M
    e = k
    while e:
        if e & 1:
            result = base if result is None else result @ base
        e >>= 1
        if e:
            base = base @ base
    return complex(np.trace(result))


def trace_powers(M, kmax: int) -> np.ndarray:
    """[Tr M, Tr M², ..., Tr M^kmax] by successive multiplication."""
    M = np.asarray(M, dtype=complex)
    out = np.empty(kmax, dtype=complex)
    P = M
    for k in range(kmax):
        if k:
            P = P @ M
        out[k] = np.trace(P)
    return out


def general_eigvals(M) -> np.ndarray:
    """Eigenvalues of a general square matrix without a QR eigensolver.

    Power traces -> Newton–Girard -> characteristic polynomial ->
    Durand–Kerner.  Intended as a cross-check for small matrices.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    p = trace_powers(M, n)
    e = elementary_from_power_sums(p)
    return durand_kerner(charpoly_from_elementary(e))


def swap_permutation(d: int) -> np.ndarray:
    """P|i,k> = |k,i> on C^d ⊗ C^d."""
    P = np.zeros((d * d, d * d))
    for i in range(d):
        for k in range(d):
            P[k * d + i, i * d + k] = 1.0
    return P


def sector_bases(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases (as columns) of the symmetric and antisymmetric subspaces."""
    sym, anti = [], []
    for i in range(d):
        for k in range(i, d):
            v = np.zeros(d * d)
            if i == k:
                v[i * d + i] = 1.0
                sym.append(v)
                continue
            v[i * d + k] = v[k * d + i] = 1 / np.sqrt(2)
            sym.append(v)
            w = np.zeros(d * d)
            w[i * d + k] = 1 / np.sqrt(2)
            w[k * d + i] = -1 / np.sqrt(2)
            anti.append(w)
    return np.array(sym).T, np.array(anti).T


@dataclass(frozen=True)
class SectorDecomposition:
    r_plus: np.ndarray
    r_minus: np.ndarray
    commutator_norm: float


def sector_decompose(rho, dims=None, real_tol: float = 1e-10) -> SectorDecomposition:
    """Split R(ρ) into its P-symmetric and P-antisymmetric blocks.

    Requires a real-entried state on d×d.
    """
    m, dims = _unpack(rho, dims)
    if dims.d_a != dims.d_b:
        raise NotApplicableError("sector decomposition needs equal subsystem dimensions")
    if np.max(np.abs(m.imag)) >= real_tol:
        raise NotApplicableError("the P-sector decomposition requires real entries")
    d = dims.d_a
    R = realign(m.real.astype(complex), dims).real
    P = swap_permutation(d)
    comm = float(np.linalg.norm(R @ P - P @ R))
    if comm > 1e-10:
        raise ContractError(f"[R, P] = {comm:.2e} for a real state; input is inconsistent")
    Us, Ua = sector_bases(d)
    return SectorDecomposition(Us.T @ R @ Us, Ua.T @ R @ Ua, comm)


@dataclass(frozen=True)
class FanoForm:
    r: np.ndarray
    s: np.ndarray
    T: np.ndarray

    def matrix(self) -> np.ndarray:
        return fano_matrix(self.r, self.s, self.T)


def fano_decompose(rho, dims=None) -> FanoForm:
    """Pauli expansion of a two-qubit state."""
    m, dims = _unpack(rho, dims)
    if dims.as_tuple() != (2, 2):
        raise DimensionError(f"Fano form needs a two-qubit state, got {dims.as_tuple()}")
    eye = np.eye(2)
    r = np.array([np.trace(m @ np.kron(p, eye)).real for p in PAULI])
    s = np.array([np.trace(m @ np.kron(eye, p)).real for p in PAULI])
    T = np.array([[np.trace(m @ np.kron(p, q)).real for q in PAULI] for p in PAULI])
    return FanoForm(r, s, T)


def gellmann_basis(d: int = 3) -> list[np.ndarray]:
    """Generalized Gell-Mann matrices with Tr[Λ_α Λ_β] = 2δ_αβ.

    Order: for each pair j<k the symmetric then antisymmetric off-diagonal
    matrix, followed by the d-1 diagonal ones.
    """
    mats = []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            mats += [s, a]
    for l in range(1, d):
        g = np.zeros((d, d), dtype=complex)
        g[np.arange(l), np.arange(l)] = 1
        g[l, l] = -l
        mats.append(g * np.sqrt(2 / (l * (l + 1))))
    return mats


def gellmann_tensor(rho, dims=None) -> np.ndarray:
    """T_αβ = Tr[ρ (Λ_α ⊗ Λ_β)], an 8×8 real matrix for two qutrits."""
    m, dims = _unpack(rho, dims)
    if dims.as_tuple() != (3, 3):
        raise DimensionError(f"Gell-Mann tensor defined here for 3x3, got {dims.as_tuple()}")
    L = gellmann_basis(3)
    t = m.reshape(3, 3, 3, 3)
    # Tr[ρ (A⊗B)] = Σ ρ_{(i,j),(k,l)} A_{k,i} B_{l,j}
    A = np.array(L)
    return np.einsum("ijkl,aki,blj->ab", t, A, A).real


def entropy_of_weights(x, zero_tol: float = 1e-12) -> float:
    """Shannon entropy (natural log) of a nonnegative vector normalized to sum 1."""
    x = np.asarray(x, dtype=float)
    x = np.where(x > zero_tol, x, 0.0)
    tot = x.sum()
    if tot <= 0:
        return 0.0
    p = x[x > 0] / tot
    return float(-(p * np.log(p)).sum())


def sv_entropy(M) -> float:
    return entropy_of_weights(singular_values(M))


def von_neumann_entropy(M, zero_tol: float = 1e-12) -> float:
    """-Σ λ ln λ over eigenvalues above ``zero_tol`` (no renormalization)."""
    lam = herm_eigvals(M)
    lam = lam[lam > zero_tol]
    return float(-(lam * np.log(lam)).sum())
