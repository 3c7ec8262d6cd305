"""State families and random-state samplers for bipartite systems.

Every constructor returns a :class:`DensityMatrix` in the row-major basis
``index = a * d_b + b``.  Randomness always flows through an explicit seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, ParameterError, ContractError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = -1e-9


class Family(str, enum.Enum):
    PRODUCT = "Product"
    PARAM_PURE = "ParamPure"
    BELL = "Bell"
    WERNER = "Werner"
    BELL_PRODUCT_MIX = "BellProductMix"
    MUB_EXTREMAL = "MubExtremal"
    CANONICAL_SEP_EXTREMAL = "CanonicalSepExtremal"
    HORODECKI = "Horodecki"
    TILES = "Tiles"
    CHESSBOARD = "Chessboard"
    MARGINAL_NOISE = "MarginalNoise"
    RANDOM_SEPARABLE = "RandomSeparable"
    RANDOM_HAAR = "RandomHaar"


class Truth(str, enum.Enum):
    SEP = "SEP"
    NPT = "NPT"
    BE = "BE"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class BipartiteDims:
    d_a: int
    d_b: int

    def __post_init__(self):
        if int(self.d_a) != self.d_a or int(self.d_b) != self.d_b:
            raise DimensionError(f"dimensions must be integers, got {self.d_a}x{self.d_b}")
        if self.d_a < 2 or self.d_b < 2:
            raise DimensionError(f"both subsystems need dimension >= 2, got {self.d_a}x{self.d_b}")

    @property
    def total(self) -> int:
        return self.d_a * self.d_b

    def as_tuple(self) -> tuple[int, int]:
        return (self.d_a, self.d_b)


def as_dims(dims) -> BipartiteDims:
    if isinstance(dims, BipartiteDims):
        return dims
    d_a, d_b = dims
    return BipartiteDims(int(d_a), int(d_b))


@dataclass(frozen=True)
class StateLabel:
    family: Family
    params: Mapping[str, float] = field(default_factory=dict)
    truth: Truth = Truth.UNKNOWN

    def to_dict(self) -> dict:
        return {"family": self.family.value, "params": dict(self.params), "truth": self.truth.value}

    @classmethod
    def from_dict(cls, d: Mapping) -> "StateLabel":
        return cls(Family(d["family"]), dict(d.get("params", {})), Truth(d.get("truth", "Unknown")))


class DensityMatrix:
    """A validated bipartite density matrix.

    ``data`` is stored as a read-only complex array.  Pass ``validate=False``
    only for intermediate matrices that are known to be valid up to roundoff.
    """

    __slots__ = ("data", "dims")

    def __init__(self, data, dims, validate: bool = True):
        dims = as_dims(dims)
        arr = np.array(data, dtype=complex)
        if arr.shape != (dims.total, dims.total):
            raise DimensionError(f"matrix shape {arr.shape} does not match dims {dims.as_tuple()}")
        arr.setflags(write=False)
        self.data = arr
        self.dims = dims
        if validate:
            self.check()

    def check(self) -> None:
        m = self.data
        herm_dev = np.max(np.abs(m - m.conj().T))
        if herm_dev > HERMITIAN_TOL:
            raise ContractError(f"not Hermitian: max |M - M^dag| = {herm_dev:.3e}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ContractError(f"trace {tr!r} differs from 1")
        lam_min = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lam_min < PSD_TOL:
            raise ContractError(f"not positive semidefinite: smallest eigenvalue {lam_min:.3e}")

    @property
    def d_a(self) -> int:
        return self.dims.d_a

    @property
    def d_b(self) -> int:
        return self.dims.d_b

    def is_real(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.data.imag)) < tol)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims.as_tuple()})"


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ParameterError("zero vector cannot be normalized")
    return v / n


def _proj(v) -> np.ndarray:
    return np.outer(v, v.conj())


def _ket(dims: BipartiteDims, a: int, b: int) -> np.ndarray:
    v = np.zeros(dims.total, dtype=complex)
    v[a * dims.d_b + b] = 1.0
    return v


def from_pure(vec, dims) -> DensityMatrix:
    """Projector onto a (normalized) state vector."""
    return DensityMatrix(_proj(_unit(vec)), dims)


def make_product(a, b) -> DensityMatrix:
    """|a>|b> product state from two local vectors."""
    a, b = _unit(a), _unit(b)
    return DensityMatrix(_proj(np.kron(a, b)), (a.size, b.size))


def partial_trace(rho: DensityMatrix, keep: str) -> np.ndarray:
    """Reduced matrix on ``keep`` ('A' or 'B')."""
    t = rho.data.reshape(rho.d_a, rho.d_b, rho.d_a, rho.d_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ParameterError(f"keep must be 'A' or 'B', got {keep!r}")


def make_param_pure(theta: float, dims=(2, 2)) -> DensityMatrix:
    """cos(θ/2)|00> + sin(θ/2)|11>; in 2x3 the third B level stays empty."""
    dims = as_dims(dims)
    if dims.as_tuple() not in ((2, 2), (2, 3)):
        raise DimensionError(f"parametrized pure state defined for 2x2 or 2x3, got {dims.as_tuple()}")
    if not 0.0 <= theta <= np.pi:
        raise ParameterError(f"theta must lie in [0, pi], got {theta}")
    v = np.cos(theta / 2) * _ket(dims, 0, 0) + np.sin(theta / 2) * _ket(dims, 1, 1)
    return DensityMatrix(_proj(v), dims)


_BELL = {
    "phi+": ((0, 0), (1, 1), 1),
    "phi-": ((0, 0), (1, 1), -1),
    "psi+": ((0, 1), (1, 0), 1),
    "psi-": ((0, 1), (1, 0), -1),
}


def bell_vector(kind: str = "phi+") -> np.ndarray:
    try:
        (a0, b0), (a1, b1), s = _BELL[kind]
    except KeyError:
        raise ParameterError(f"unknown Bell state {kind!r}") from None
    dims = BipartiteDims(2, 2)
    return (_ket(dims, a0, b0) + s * _ket(dims, a1, b1)) / np.sqrt(2)


def make_bell(kind: str = "phi+") -> DensityMatrix:
    return DensityMatrix(_proj(bell_vector(kind)), (2, 2))


def make_werner(p: float) -> DensityMatrix:
    """p|Ψ-><Ψ-| + (1-p) I/4."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"Werner weight must lie in [0, 1], got {p}")
    m = p * _proj(bell_vector("psi-")) + (1 - p) * np.eye(4) / 4
    return DensityMatrix(m, (2, 2))


def make_bell_product_mix(p: float, variant: str = "psi_minus") -> DensityMatrix:
    """Bell state mixed with |00>.

    ``psi_minus``: p|Ψ-><Ψ-| + (1-p)|00><00| (entangled for every p > 0).
    ``phi_plus``: (1-p)|Φ+><Φ+| + p|00><00|, whose Bloch vectors are (0, 0, p).
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"mixing weight must lie in [0, 1], got {p}")
    e00 = _proj(_ket(BipartiteDims(2, 2), 0, 0))
    if variant == "psi_minus":
        m = p * _proj(bell_vector("psi-")) + (1 - p) * e00
    elif variant == "phi_plus":
        m = (1 - p) * _proj(bell_vector("phi+")) + p * e00
    else:
        raise ParameterError(f"unknown Bell-product variant {variant!r}")
    return DensityMatrix(m, (2, 2))


def _qubit_mub():
    e0 = np.array([1, 0], dtype=complex)
    e1 = np.array([0, 1], dtype=complex)
    s = 1 / np.sqrt(2)
    return {
        "z+": e0, "z-": e1,
        "x+": s * (e0 + e1), "x-": s * (e0 - e1),
        "y+": s * (e0 + 1j * e1), "y-": s * (e0 - 1j * e1),
    }


def make_mub_extremal(sign: str) -> DensityMatrix:
    """Equal mixture of three MUB product projectors.

    ``'+'`` pairs each basis vector with itself, ``'-'`` with its orthogonal partner.
    """
    if sign not in ("+", "-"):
        raise ParameterError(f"sign must be '+' or '-', got {sign!r}")
    mub = _qubit_mub()
    m = np.zeros((4, 4), dtype=complex)
    for axis in "zxy":
        m += _proj(np.kron(mub[axis + "+"], mub[axis + sign])) / 3
    return DensityMatrix(m, (2, 2))


def make_canonical_extremal(sign: str = "-") -> DensityMatrix:
    """Canonical local-unitary form of the MUB extremal states.

    Bloch vectors a = b = (1/√3, 0, 0) and T = diag(1/3, 1/3, ±1/3).  For
    ``'-'`` this is the exact matrix (1/12)[[2,√3,√3,0],[√3,4,2,√3],...].
    """
    if sign not in ("+", "-"):
        raise ParameterError(f"sign must be '+' or '-', got {sign!r}")
    if sign == "-":
        r = np.sqrt(3.0)
        m = np.array([[2, r, r, 0], [r, 4, 2, r], [r, 2, 4, r], [0, r, r, 2]], dtype=complex) / 12
    else:
        a = np.array([1 / np.sqrt(3), 0.0, 0.0])
        m = fano_matrix(a, a, np.diag([1 / 3, 1 / 3, 1 / 3]))
    return DensityMatrix(m, (2, 2))


PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def fano_matrix(r, s, T) -> np.ndarray:
    """¼(I⊗I + r·σ⊗I + I⊗s·σ + Σ T_ij σ_i⊗σ_j)."""
    eye = np.eye(2, dtype=complex)
    m = np.eye(4, dtype=complex)
    for i in range(3):
        m += r[i] * np.kron(PAULI[i], eye) + s[i] * np.kron(eye, PAULI[i])
        for j in range(3):
            m += T[i][j] * np.kron(PAULI[i], PAULI[j])
    return m / 4


def make_horodecki(a: float) -> DensityMatrix:
    """Rank-7 one-parameter 3x3 PPT entangled family."""
    if not 0.0 < a < 1.0:
        raise ParameterError(f"Horodecki parameter must lie in (0, 1), got {a}")
    b = 0.5 * np.sqrt(1 - a * a)
    c = 0.5 * (1 + a)
    m = np.diag([a, a, a, a, a, a, c, a, c]).astype(complex)
    for i, j in ((0, 4), (0, 8), (4, 8)):
        m[i, j] = m[j, i] = a
    m[6, 8] = m[8, 6] = b
    return DensityMatrix(m / (8 * a + 1), (3, 3))


def tiles_vectors() -> list[np.ndarray]:
    """The five product vectors of the Tiles unextendible product basis."""
    e = np.eye(3, dtype=complex)
    s = (e[0] + e[1] + e[2]) / np.sqrt(3)
    h = 1 / np.sqrt(2)
    return [
        np.kron(e[0], h * (e[0] - e[1])),
        np.kron(e[2], h * (e[1] - e[2])),
        np.kron(h * (e[0] - e[1]), e[2]),
        np.kron(h * (e[1] - e[2]), e[0]),
        np.kron(s, s),
    ]


def make_tiles(epsilon: float = 0.0) -> DensityMatrix:
    """Normalized projector onto the UPB complement, with white noise ε."""
    if not 0.0 <= epsilon <= 0.15:
        raise ParameterError(f"Tiles noise must lie in [0, 0.15], got {epsilon}")
    m = (np.eye(9) - sum(_proj(v) for v in tiles_vectors())) / 4
    m = (1 - epsilon) * m + epsilon * np.eye(9) / 9
    return DensityMatrix(m, (3, 3))


def chessboard_vectors(a, b, c, d, m, n) -> list[np.ndarray]:
    if m == 0 or n == 0:
        raise ParameterError("chessboard parameters m and n must be nonzero")
    s = a * c / n
    t = a * d / m
    dims = BipartiteDims(3, 3)
    k = lambda i, j: _ket(dims, i, j)  # noqa: E731
    return [
        m * k(0, 0) + s * k(0, 2) + n * k(1, 1),
        a * k(0, 1) + b * k(1, 0) + c * k(1, 2),
        n * k(0, 0) - m * k(1, 1) + t * k(2, 0),
        b * k(0, 1) - a * k(1, 0) + d * k(2, 1),
    ]


def make_chessboard(a, b, c, d, m, n) -> DensityMatrix:
    """Rank-4 checkerboard state; entangled iff m·n != a·b."""
    params = (a, b, c, d, m, n)
    if any(x == 0 for x in params):
        raise ParameterError(f"chessboard parameters must be nonzero, got {params}")
    mat = sum(_proj(v) for v in chessboard_vectors(*params))
    return DensityMatrix(mat / np.trace(mat).real, (3, 3))


def make_marginal_noise(seed: DensityMatrix, t: float) -> DensityMatrix:
    """(1-t)·ρ0 + t·ρ_A⊗ρ_B."""
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"marginal-noise weight must lie in [0, 1], got {t}")
    prod = np.kron(partial_trace(seed, "A"), partial_trace(seed, "B"))
    return DensityMatrix((1 - t) * seed.data + t * prod, seed.dims)


def mix_white(rho: DensityMatrix, eps: float) -> DensityMatrix:
    """(1-ε)ρ + ε·I/d."""
    if not 0.0 <= eps <= 1.0:
        raise ParameterError(f"noise weight must lie in [0, 1], got {eps}")
    d = rho.dims.total
    return DensityMatrix((1 - eps) * rho.data + eps * np.eye(d) / d, rho.dims)


def make_classical_correlated(d: int = 3) -> DensityMatrix:
    """(1/d) Σ_a |aa><aa|."""
    dims = BipartiteDims(d, d)
    m = sum(_proj(_ket(dims, i, i)) for i in range(d)) / d
    return DensityMatrix(m, dims)


# ---------------------------------------------------------------- samplers

class SampleKind(str, enum.Enum):
    RANDOM_SEPARABLE = "RandomSeparable"
    RANDOM_HAAR = "RandomHaar"
    RANDOM_PRODUCT_PURE = "RandomProductPure"


def haar_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_separable_matrix(dims: BipartiteDims, K: int, rng: np.random.Generator) -> np.ndarray:
    w = rng.standard_exponential(K)
    w /= w.sum()
    m = np.zeros((dims.total, dims.total), dtype=complex)
    for wk in w:
        v = np.kron(haar_vector(dims.d_a, rng), haar_vector(dims.d_b, rng))
        m += wk * _proj(v)
    return m


def ginibre_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    m = g @ g.conj().T
    return m / np.trace(m).real


def sample_state(kind, dims, rng_seed, K: int = 5) -> tuple[DensityMatrix, StateLabel]:
    """Draw one random state.

    ``rng_seed`` may be an int or a ``numpy.random.Generator`` (consumed in place).
    """
    kind = SampleKind(kind)
    dims = as_dims(dims)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    if kind is SampleKind.RANDOM_SEPARABLE:
        if K < 1:
            raise ParameterError(f"need K >= 1 product terms, got {K}")
        m = random_separable_matrix(dims, K, rng)
        label = StateLabel(Family.RANDOM_SEPARABLE, {"K": float(K)}, Truth.SEP)
    elif kind is SampleKind.RANDOM_PRODUCT_PURE:
        m = random_separable_matrix(dims, 1, rng)
        label = StateLabel(Family.PRODUCT, {}, Truth.SEP)
    else:
        m = ginibre_matrix(dims.total, rng)
        label = StateLabel(Family.RANDOM_HAAR, {}, Truth.UNKNOWN)
    return DensityMatrix(m, dims), label


def random_states(kind, dims, n: int, rng_seed, K: int = 5) -> list[DensityMatrix]:
    rng = np.random.default_rng(rng_seed)
    return [sample_state(kind, dims, rng, K=K)[0] for _ in range(n)]


def chessboard_integer_grid(a_vals: Sequence[int] = range(1, 5), mn_vals: Sequence[int] = range(1, 4),
                            entangled: bool = True) -> list[tuple[int, ...]]:
    """Integer tuples (a,b,c,d,m,n) from the dataset grid, filtered by mn != ab."""
    out = []
    for a in a_vals:
        for b in a_vals:
            for c in a_vals:
                for d in a_vals:
                    for m in mn_vals:
                        for n in mn_vals:
                            if (m * n != a * b) == entangled:
                                out.append((a, b, c, d, m, n))
    return out
