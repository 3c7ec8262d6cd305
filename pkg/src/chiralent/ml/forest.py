"""CART trees with Gini splits and bagged / extremely randomized forests."""

from __future__ import annotations

import math

import numpy as np

from .logreg import balanced_weights


class Tree:
    """Flattened binary tree; ``feature < 0`` marks a leaf."""

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[node] >= 0
        while active.any():
            r = rows[active]
            nd = node[r]
            go_left = X[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict_proba(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d) -> "Tree":
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["value"])


def _gini_score(wl, wl1, wr, wr1):
    """Σ_children Σ_c w_c²/w_child; larger is purer (equivalent to minimizing weighted Gini)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        left = np.where(wl > 0, (wl1 ** 2 + (wl - wl1) ** 2) / wl, 0.0)
        right = np.where(wr > 0, (wr1 ** 2 + (wr - wr1) ** 2) / wr, 0.0)
    return left + right


def best_split(X, y, w, features, extra_rng=None, min_leaf_weight=0.0):
    """Best (feature, threshold, gain) among candidate columns, or None.

    With ``extra_rng`` each column gets one threshold drawn uniformly between
    its node minimum and maximum (extra-trees mode).
    """
    Xf = X[:, features]
    W = w.sum()
    W1 = w @ y
    parent = (W1 ** 2 + (W - W1) ** 2) / W
    if extra_rng is not None:
        lo, hi = Xf.min(axis=0), Xf.max(axis=0)
        ok = hi > lo
        if not ok.any():
            return None
        thr = lo + extra_rng.random(lo.size) * (hi - lo)
        left = Xf <= thr
        wl = w @ left
        wl1 = (w * y) @ left
        score = _gini_score(wl, wl1, W - wl, W1 - wl1)
        score = np.where(ok & (wl > min_leaf_weight) & (W - wl > min_leaf_weight), score, -np.inf)
        j = int(np.argmax(score))
        if not np.isfinite(score[j]) or score[j] <= parent + 1e-12:
            return None
        return features[j], float(thr[j]), float(score[j] - parent)
    order = np.argsort(Xf, axis=0, kind="stable")
    xs = np.take_along_axis(Xf, order, axis=0)
    ws = w[order]
    wys = (w * y)[order]
    wl = np.cumsum(ws, axis=0)[:-1]
    wl1 = np.cumsum(wys, axis=0)[:-1]
    score = _gini_score(wl, wl1, W - wl, W1 - wl1)
    valid = (xs[1:] > xs[:-1]) & (wl > min_leaf_weight) & (W - wl > min_leaf_weight)
    score = np.where(valid, score, -np.inf)
    flat = int(np.argmax(score))
    i, j = np.unravel_index(flat, score.shape)
    if not np.isfinite(score[i, j]) or score[i, j] <= parent + 1e-12:
        return None
    thr = 0.5 * (xs[i, j] + xs[i + 1, j])
    if thr >= xs[i + 1, j]:  # midpoint rounding onto the right value
        thr = xs[i, j]
    return features[j], float(thr), float(score[i, j] - parent)


def grow_tree(X, y, w, rng, max_depth=None, max_features=None, min_samples_split=2, extra=False) -> Tree:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    p = X.shape[1]
    m = p if max_features is None else max(1, min(p, max_features))
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        wi = w[idx]
        value.append(float(wi @ y[idx] / wi.sum()))
        return len(feature) - 1

    root_idx = np.flatnonzero(w > 0)
    stack = [(new_node(root_idx), root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        v = value[node]
        if v in (0.0, 1.0) or idx.size < min_samples_split or (max_depth is not None and depth >= max_depth):
            continue
        feats = rng.choice(p, size=m, replace=False) if m < p else np.arange(p)
        sp = best_split(X[idx], y[idx], w[idx], feats, rng if extra else None)
        if sp is None:
            continue
        f, t, _ = sp
        go = X[idx, f] <= t
        li, ri = idx[go], idx[~go]
        if li.size == 0 or ri.size == 0:
            continue
        feature[node], threshold[node] = int(f), t
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((left[node], li, depth + 1))
        stack.append((right[node], ri, depth + 1))
    return Tree(feature, threshold, left, right, value)


def _resolve_max_features(spec, p):
    if spec is None or spec == "all":
        return p
    if spec == "sqrt":
        return max(1, int(math.sqrt(p)))
    if spec == "log2":
        return max(1, int(math.log2(p)))
    return int(spec)


class RandomForest:
    kind = "RandomForest"

    def __init__(self, n_trees: int = 500, max_depth: int | None = None, features_per_split="sqrt",
                 rng_seed: int = 0, bootstrap: bool | None = None, extra_trees: bool = False,
                 balanced: bool = True, min_samples_split: int = 2):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.features_per_split = features_per_split
        self.rng_seed = rng_seed
        self.extra_trees = extra_trees
        self.bootstrap = (not extra_trees) if bootstrap is None else bootstrap
        self.balanced = balanced
        self.min_samples_split = min_samples_split
        self.trees: list[Tree] = []
        self.inbag: list[np.ndarray] = []

    def config(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth, "features_per_split": self.features_per_split,
                "rng_seed": self.rng_seed, "bootstrap": self.bootstrap, "extra_trees": self.extra_trees,
                "balanced": self.balanced, "min_samples_split": self.min_samples_split}

    def fit(self, X, y, keep_inbag: bool = False) -> "RandomForest":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, p = X.shape
        cw = balanced_weights(y) if self.balanced else np.ones(n)
        m = _resolve_max_features(self.features_per_split, p)
        self.trees, self.inbag = [], []
        for seq in np.random.SeedSequence(self.rng_seed).spawn(self.n_trees):
            rng = np.random.default_rng(seq)
            counts = np.bincount(rng.integers(0, n, n), minlength=n) if self.bootstrap else np.ones(n)
            self.trees.append(grow_tree(X, y, counts * cw, rng, self.max_depth, m,
                                        self.min_samples_split, self.extra_trees))
            if keep_inbag:
                self.inbag.append(counts > 0)
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.mean([t.predict_proba(X) for t in self.trees], axis=0)

    def oob_proba(self, X) -> np.ndarray:
        """Average over trees that did not see each training row (NaN if none)."""
        if not self.inbag:
            raise ValueError("fit with keep_inbag=True to get out-of-bag scores")
        X = np.asarray(X, dtype=float)
        tot = np.zeros(X.shape[0])
        cnt = np.zeros(X.shape[0])
        for t, ib in zip(self.trees, self.inbag):
            out = ~ib
            tot[out] += t.predict_proba(X[out])
            cnt[out] += 1
        with np.errstate(invalid="ignore", divide="ignore"):
            return tot / cnt

    def to_dict(self) -> dict:
        return {"config": self.config(), "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d) -> "RandomForest":
        m = cls(**d["config"])
        m.trees = [Tree.from_dict(t) for t in d["trees"]]
        return m
