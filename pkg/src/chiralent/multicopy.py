"""Exact k-copy operators for small bipartite systems.

Everything here is dense and deliberately naive: it is the trusted oracle
against which the trace-power moment code is checked.

Layout on the k-copy space is copy-major with A before B inside each copy,
so site 2c is A of copy c and site 2c+1 is B of copy c (0-based).  With this
layout ρ^⊗k is a plain Kronecker power.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import reduce

import numpy as np
from scipy.stats import binom

from .errors import ContractError, DimensionError, ParameterError, SizeGuardError
from .qstate import DensityMatrix, PAULI

MAX_DIM = 256


class Tag(str, Enum):
    CYCLE = "Cycle"
    ANTICYCLE = "AntiCycle"
    SWAP = "Swap"
    SINGLET = "SingletProj"
    CHI = "Chi"
    OMEGA = "Omega"
    DELTA = "Delta"


@dataclass(frozen=True)
class MultiCopyOperator:
    n_sites: int
    data: np.ndarray
    tag: Tag
    indices: tuple = ()

    @property
    def n_qubits(self) -> int:
        return self.n_sites


def _guard(dim: int) -> None:
    if dim > MAX_DIM:
        raise SizeGuardError(f"operator dimension {dim} exceeds the {MAX_DIM} guard")


def site_permutation(perm, site_dims) -> np.ndarray:
    """Operator sending the content of site s to site perm[s].

    P |x_0, ..., x_{n-1}> = |y> with y_{perm[s]} = x_s.
    """
    site_dims = list(site_dims)
    n = len(site_dims)
    perm = list(perm)
    if sorted(perm) != list(range(n)):
        raise ParameterError(f"{perm} is not a permutation of {n} sites")
    if [site_dims[perm[s]] for s in range(n)] != site_dims:
        raise DimensionError("permutation mixes sites of different dimension")
    D = int(np.prod(site_dims))
    _guard(D)
    idx = np.arange(D).reshape(site_dims)
    # y has axes in target order; axis perm[s] of y carries x's axis s
    inv = np.argsort(perm)
    target = idx.transpose(inv).reshape(-1)
    P = np.zeros((D, D))
    P[np.arange(D), target] = 1.0
    return P


def cycle_perm(k: int, inverse: bool = False) -> list[int]:
    """Cyclic shift of k copies: copy c goes to c+1 (mod k), or c-1 if inverse."""
    step = -1 if inverse else 1
    return [(c + step) % k for c in range(k)]


def copy_cycle(k: int, d: int = 2, inverse: bool = False) -> np.ndarray:
    """Cyclic permutation on k single-site copies of dimension d."""
    return site_permutation(cycle_perm(k, inverse), [d] * k)


def bipartite_cycle(k: int, dims, inverse_a: bool, inverse_b: bool) -> np.ndarray:
    """(σ_A^{±1} ⊗ σ_B^{±1}) on the copy-major A1B1A2B2... space."""
    d_a, d_b = dims
    pa = cycle_perm(k, inverse_a)
    pb = cycle_perm(k, inverse_b)
    perm = [0] * (2 * k)
    for c in range(k):
        perm[2 * c] = 2 * pa[c]
        perm[2 * c + 1] = 2 * pb[c] + 1
    return site_permutation(perm, [d_a, d_b] * k)


def pauli_on(n: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Kronecker product placing ``ops[j]`` on qubit j and identity elsewhere."""
    _guard(2 ** n)
    eye = np.eye(2, dtype=complex)
    return reduce(np.kron, [ops.get(j, eye) for j in range(n)])


def g_op(n: int, i: int, j: int) -> np.ndarray:
    """g_ij = σ_i · σ_j."""
    return sum(pauli_on(n, {i: s, j: s}) for s in PAULI)


def swap_op(n: int, i: int, j: int) -> np.ndarray:
    """S_ij = (1 + g_ij)/2."""
    return 0.5 * (np.eye(2 ** n) + g_op(n, i, j))


def singlet_proj(n: int, i: int, j: int) -> np.ndarray:
    """P⁻_ij = (1 − g_ij)/4."""
    return 0.25 * (np.eye(2 ** n) - g_op(n, i, j))


def _levi_civita():
    for a, b, c in itertools.permutations(range(3)):
        sign = np.linalg.det(np.eye(3)[[a, b, c]])
        yield a, b, c, round(sign)


def chi_op(n: int, i: int, j: int, k: int) -> np.ndarray:
    """χ_ijk = (1/8) Σ ε_abc σ_i^a σ_j^b σ_k^c."""
    if len({i, j, k}) != 3:
        raise ParameterError("chirality needs three distinct qubits")
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for a, b, c, s in _levi_civita():
        out += s * pauli_on(n, {i: PAULI[a], j: PAULI[b], k: PAULI[c]})
    return out / 8


def omega_op(k: int, sites=None, n: int | None = None) -> np.ndarray:
    """Ω_k on the qubits ``sites`` (default 0..k-1) of an n-qubit register.

    Ω_2 = 0, Ω_3 = χ_123, Ω_4 = ½ Σ_{i<j<l} χ_ijl.
    """
    sites = list(range(k)) if sites is None else list(sites)
    n = len(sites) if n is None else n
    if k == 2:
        return np.zeros((2 ** n, 2 ** n), dtype=complex)
    if k == 3:
        return chi_op(n, *sites)
    if k == 4:
        return 0.5 * sum(chi_op(n, *trip) for trip in itertools.combinations(sites, 3))
    raise SizeGuardError(f"Ω_k is provided for k ≤ 4, got {k}")


def delta_op(k: int) -> np.ndarray:
    """Δ = σ⁻¹ − σ on k qubits."""
    return copy_cycle(k, inverse=True) - copy_cycle(k)


def build_operator(tag: Tag | str, k_copies: int, indices=()) -> MultiCopyOperator:
    """Named operator on the k-qubit space of one subsystem (one qubit per copy)."""
    tag = Tag(tag)
    if k_copies > 4:
        raise SizeGuardError("k_copies > 4 exceeds the 2^8 guard for two-qubit copies")
    if k_copies < 2:
        raise ParameterError("k_copies must be at least 2")
    idx = tuple(indices)
    if len(set(idx)) != len(idx) or any(not 0 <= i < k_copies for i in idx):
        raise ParameterError(f"indices {idx} must be distinct and inside 0..{k_copies - 1}")
    n = k_copies
    if tag is Tag.CYCLE:
        m = copy_cycle(n)
    elif tag is Tag.ANTICYCLE:
        m = copy_cycle(n, inverse=True)
    elif tag is Tag.SWAP:
        m = swap_op(n, *idx)
    elif tag is Tag.SINGLET:
        m = singlet_proj(n, *idx)
    elif tag is Tag.CHI:
        m = chi_op(n, *idx)
    elif tag is Tag.OMEGA:
        m = omega_op(n)
    else:
        m = delta_op(n)
    return MultiCopyOperator(n, np.asarray(m, dtype=complex), tag, idx)


def verify_delta_omega(k: int) -> float:
    """‖(σ⁻¹ − σ) − 4iΩ_k‖_F."""
    if k not in (2, 3, 4):
        raise ParameterError("k must be 2, 3 or 4")
    return float(np.linalg.norm(delta_op(k) - 4j * omega_op(k)))


def cancellation_residual() -> float:
    """‖g₃₄χ₁₂₃ + g₁₂χ₂₃₄ − (χ₁₂₄ + χ₁₃₄)‖_F.

    Each product g·χ has an imaginary piece; the two pieces cancel, leaving
    the two remaining triples of Ω_4.
    """
    n = 4
    lhs = g_op(n, 2, 3) @ chi_op(n, 0, 1, 2) + g_op(n, 0, 1) @ chi_op(n, 1, 2, 3)
    rhs = chi_op(n, 0, 1, 3) + chi_op(n, 0, 2, 3)
    return float(np.linalg.norm(lhs - rhs))


# ------------------------------------------------------------ state traces

def tensor_power(rho: DensityMatrix, k: int) -> np.ndarray:
    _guard(rho.dims.total ** k)
    return reduce(np.kron, [rho.data] * k)


def permutation_trace(rho: DensityMatrix, k: int, variant: str = "Mu") -> float:
    """Tr[(σ_A^{-1} ⊗ σ_B) ρ^⊗k] for ``Mu`` or Tr[(σ_A ⊗ σ_B) ρ^⊗k] for ``I``."""
    if variant not in ("Mu", "I"):
        raise ParameterError(f"variant must be 'Mu' or 'I', got {variant!r}")
    if k < 1:
        raise ParameterError("k must be positive")
    dims = rho.dims.as_tuple()
    _guard(rho.dims.total ** k)
    op = bipartite_cycle(k, dims, inverse_a=(variant == "Mu"), inverse_b=False)
    return float(np.trace(op @ tensor_power(rho, k)).real)


def _side_embedding(op_k: np.ndarray, k: int, side: int) -> np.ndarray:
    """Lift an operator on the k A-qubits (side 0) or B-qubits (side 1) to 2k qubits."""
    # place the side's qubits first, the other side after, then permute into A1B1A2B2...
    eye = np.eye(2 ** k)
    full = np.kron(op_k, eye)
    perm = [0] * (2 * k)
    for c in range(k):
        perm[c] = 2 * c + side
        perm[k + c] = 2 * c + (1 - side)
    P = site_permutation(perm, [2] * (2 * k))
    return P @ full @ P.T


def _check_qubits(rho: DensityMatrix) -> None:
    if rho.dims.as_tuple() != (2, 2):
        raise DimensionError(f"the k-copy chirality oracle needs 2x2 states, got {rho.dims.as_tuple()}")


def correlator_ck(rho: DensityMatrix, k: int) -> float:
    """C_k = 8 Tr[Ω_A Ω_B ρ^⊗k]."""
    _check_qubits(rho)
    if k not in (3, 4):
        raise ParameterError("correlator form is defined for k = 3, 4")
    oa = _side_embedding(omega_op(k), k, 0)
    ob = _side_embedding(omega_op(k), k, 1)
    val = 8 * np.trace(oa @ ob @ tensor_power(rho, k))
    if abs(val.imag) > 1e-10:
        raise ContractError(f"correlator has imaginary part {val.imag:.2e}")
    return float(val.real)


def delta_route_ck(rho: DensityMatrix, k: int) -> float:
    """C_k = Tr[(Δ_A ⊗ σ_B) ρ^⊗k]."""
    _check_qubits(rho)
    da = _side_embedding(delta_op(k), k, 0)
    sb = _side_embedding(copy_cycle(k), k, 1)
    return float(np.trace(da @ sb @ tensor_power(rho, k)).real)


# ----------------------------------------------------------- Hadamard test

@dataclass(frozen=True)
class HadamardResult:
    p0: float
    estimate: float
    stderr: float


def binomial_inverse_cdf(n: int, p: float, rng: np.random.Generator) -> int:
    """One Binomial(n, p) draw from a single uniform variate."""
    u = rng.random()
    return int(binom.ppf(u, n, p))


def hadamard_test(op, rho_copies, shots: int, rng_seed) -> HadamardResult:
    """Ancilla statistics of a Hadamard test of the unitary ``op`` on ``rho_copies``.

    ``rho_copies`` is the already-tensored k-copy state (matrix) or a
    DensityMatrix together with an operator on its own space.
    """
    Pi = op.data if isinstance(op, MultiCopyOperator) else np.asarray(op, dtype=complex)
    R = rho_copies.data if isinstance(rho_copies, DensityMatrix) else np.asarray(rho_copies)
    if Pi.shape != R.shape:
        raise DimensionError(f"operator {Pi.shape} and state {R.shape} differ")
    if np.linalg.norm(Pi.conj().T @ Pi - np.eye(Pi.shape[0])) > 1e-10:
        raise ContractError("Hadamard test needs a unitary operator")
    if shots < 1:
        raise ParameterError("shots must be >= 1")
    p0 = float(np.clip((1 + np.trace(Pi @ R).real) / 2, 0.0, 1.0))
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    n0 = binomial_inverse_cdf(shots, p0, rng)
    est = 2 * n0 / shots - 1
    return HadamardResult(p0, est, float(np.sqrt(max(0.0, 1 - est * est) / shots)))
