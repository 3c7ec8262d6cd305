"""Certified 3×3 BE/SEP datasets for the classifier experiments.

The bound-entangled side draws from seven families (Horodecki, chessboard,
Tiles, their marginal-noise variants, and white-noise Horodecki).  The
separable side has the same size and consists of Dirichlet-weighted mixtures
of Haar product vectors.  Every BE state is checked PPT at generation time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import features, qstate, spectral
from .errors import ConfigError, ContractError
from .qstate import BipartiteDims, DensityMatrix, Family, StateLabel, Truth

PPT_TOL = -1e-9

# full-scale counts of the published recipe; the separable side matches the BE total
FULL_COUNTS = {
    "Horodecki": 2000,
    "Chessboard": 2000,
    "Tiles": 100,
    "MN-Horodecki": 1000,
    "MN-Chessboard": 1000,
    "MN-Tiles": 200,
    "Noisy-Horodecki": 500,
}


@dataclass
class GeneratorConfig:
    scale: float = 0.3
    seed: int = 0
    horodecki_a: tuple = (0.01, 0.99)
    tiles_eps: tuple = (0.0, 0.05)
    mn_t: tuple = (0.01, 0.20)
    noisy_eps: tuple = (0.005, 0.04)
    sep_k: tuple = (2, 20)
    counts: dict = field(default_factory=lambda: dict(FULL_COUNTS))

    def family_counts(self) -> dict[str, int]:
        out = {k: int(round(v * self.scale)) for k, v in self.counts.items()}
        if any(v < 0 for v in out.values()):
            raise ConfigError("family counts must be non-negative")
        return out

    def validate(self) -> None:
        for name in ("horodecki_a", "tiles_eps", "mn_t", "noisy_eps"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ConfigError(f"{name}: empty interval ({lo}, {hi})")
        if not 0 < self.horodecki_a[0] and self.horodecki_a[1] < 1:
            raise ConfigError("Horodecki a must lie inside (0, 1)")
        if self.tiles_eps[1] > 0.15:
            raise ConfigError("Tiles noise is limited to 0.15")
        if self.sep_k[0] < 1 or self.sep_k[0] > self.sep_k[1]:
            raise ConfigError(f"bad separable term range {self.sep_k}")
        if self.scale <= 0:
            raise ConfigError("scale must be positive")


@dataclass
class Dataset:
    states: list
    labels: list
    X: np.ndarray
    feature_names: tuple
    y: np.ndarray
    family: np.ndarray

    def __len__(self) -> int:
        return len(self.states)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset([self.states[i] for i in idx], [self.labels[i] for i in idx],
                       self.X[idx], self.feature_names, self.y[idx], self.family[idx])


def _uniform(rng, lo_hi):
    return float(rng.uniform(*lo_hi))


def _check_ppt(rho: DensityMatrix) -> None:
    lam = spectral.herm_eigvals(spectral.partial_transpose(rho, "A"))
    if lam[-1] < PPT_TOL:
        raise ContractError(f"generated BE state is NPT (λ_min = {lam[-1]:.2e})")


def _chess_from_grid(rng, grid):
    params = grid[rng.integers(len(grid))]
    return qstate.make_chessboard(*params), params


def generate_states(cfg: GeneratorConfig) -> tuple[list, list, list]:
    """Return (states, labels, family names) for the BE side followed by the SEP side."""
    cfg.validate()
    counts = cfg.family_counts()
    names = list(counts)
    seqs = np.random.SeedSequence(cfg.seed).spawn(len(names) + 1)
    grid = qstate.chessboard_integer_grid()
    dims = BipartiteDims(3, 3)
    states, labels, fams = [], [], []

    def add(rho, family, params, fam_name):
        _check_ppt(rho)
        states.append(rho)
        labels.append(StateLabel(family, params, Truth.BE))
        fams.append(fam_name)

    for name, seq in zip(names, seqs[:-1]):
        rng = np.random.default_rng(seq)
        for _ in range(counts[name]):
            if name == "Horodecki":
                a = _uniform(rng, cfg.horodecki_a)
                add(qstate.make_horodecki(a), Family.HORODECKI, {"a": a}, name)
            elif name == "Chessboard":
                rho, p = _chess_from_grid(rng, grid)
                add(rho, Family.CHESSBOARD, dict(zip("abcdmn", map(float, p))), name)
            elif name == "Tiles":
                e = _uniform(rng, cfg.tiles_eps)
                add(qstate.make_tiles(e), Family.TILES, {"epsilon": e}, name)
            elif name == "MN-Horodecki":
                a, t = _uniform(rng, cfg.horodecki_a), _uniform(rng, cfg.mn_t)
                add(qstate.make_marginal_noise(qstate.make_horodecki(a), t), Family.MARGINAL_NOISE,
                    {"seed": "Horodecki", "a": a, "t": t}, name)
            elif name == "MN-Chessboard":
                rho, p = _chess_from_grid(rng, grid)
                t = _uniform(rng, cfg.mn_t)
                params = dict(zip("abcdmn", map(float, p)))
                params.update(seed="Chessboard", t=t)
                add(qstate.make_marginal_noise(rho, t), Family.MARGINAL_NOISE, params, name)
            elif name == "MN-Tiles":
                e, t = _uniform(rng, cfg.tiles_eps), _uniform(rng, cfg.mn_t)
                add(qstate.make_marginal_noise(qstate.make_tiles(e), t), Family.MARGINAL_NOISE,
                    {"seed": "Tiles", "epsilon": e, "t": t}, name)
            elif name == "Noisy-Horodecki":
                a, e = _uniform(rng, cfg.horodecki_a), _uniform(rng, cfg.noisy_eps)
                add(qstate.mix_white(qstate.make_horodecki(a), e), Family.HORODECKI,
                    {"a": a, "white_noise": e}, name)
            else:
                raise ConfigError(f"unknown family {name!r}")

    rng = np.random.default_rng(seqs[-1])
    n_be = len(states)
    for _ in range(n_be):
        K = int(rng.integers(cfg.sep_k[0], cfg.sep_k[1] + 1))
        rho, label = qstate.sample_state(qstate.SampleKind.RANDOM_SEPARABLE, dims, rng, K=K)
        states.append(rho)
        labels.append(label)
        fams.append("SEP")
    return states, labels, fams


def generate(cfg: GeneratorConfig | None = None, feature_set: str = "CORE8") -> Dataset:
    cfg = cfg or GeneratorConfig()
    states, labels, fams = generate_states(cfg)
    X, names = features.feature_matrix(states, feature_set)
    y = np.array([1 if lab.truth is Truth.BE else 0 for lab in labels])
    return Dataset(states, labels, X, names, y, np.array(fams))


def ccnr_rule(X: np.ndarray, names) -> np.ndarray:
    """Σ₁ > 1 as a 0/1 score."""
    return (X[:, list(names).index("S1")] > 1.0).astype(float)
