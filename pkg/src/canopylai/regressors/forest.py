"""Random-forest regression: B variance-reduction trees grown on seeded
bootstrap resamples, predictions averaged over the ensemble.

Determinism contract: the master seed spawns one independent substream per
tree (bootstrap draws and per-node feature subsets both come from it), and
training rows are canonically sorted before sampling, so a fixed seed yields
bit-identical models regardless of input row order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import LabeledSample
from ..errors import DataError
from .prepare import StandardizerParams, apply_standardizer, canonical_sort, fit_standardizer, samples_to_arrays

LEAF = -1


@dataclass(frozen=True)
class RegressionTree:
    """Flattened binary tree; feature[k] == -1 marks node k as a leaf."""

    feature: np.ndarray    # (nodes,) int32, split feature or -1
    threshold: np.ndarray  # (nodes,) float64, split point (x <= thr goes left)
    left: np.ndarray       # (nodes,) int32 child index
    right: np.ndarray      # (nodes,) int32 child index
    value: np.ndarray      # (nodes,) float64 leaf prediction (mean target)


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[RegressionTree, ...]
    B: int
    seed: int
    feature_subsample: int
    bootstrap: bool
    min_samples_leaf: int
    standardizer: StandardizerParams
    extractor: str = ""


def _best_split(Z: np.ndarray, y: np.ndarray, idx: np.ndarray, feats: np.ndarray,
                min_leaf: int) -> tuple[int, float] | None:
    """Lowest-child-SSE split over the candidate features, or None.

    Vectorized over features: stable-sort each column, prefix sums of y and
    y^2 give both children's SSE for every cut; cuts between equal feature
    values are invalid. Ties resolve to the earliest feature in feats, then
    the smallest cut position.
    """
    n = idx.shape[0]
    Xs = Z[np.ix_(idx, feats)]
    order = np.argsort(Xs, axis=0, kind="stable")
    xs = np.take_along_axis(Xs, order, axis=0)
    ys = y[idx][order]
    s1 = np.cumsum(ys, axis=0)
    s2 = np.cumsum(ys * ys, axis=0)
    total1 = s1[-1]
    total2 = s2[-1]

    k = np.arange(1, n, dtype=np.float64)[:, None]  # left-child sizes
    left1, left2 = s1[:-1], s2[:-1]
    sse_left = left2 - left1 * left1 / k
    sse_right = (total2 - left2) - (total1 - left1) ** 2 / (n - k)
    child_sse = sse_left + sse_right

    valid = xs[1:] > xs[:-1]
    if min_leaf > 1:
        sizes_ok = (k >= min_leaf) & (n - k >= min_leaf)
        valid &= sizes_ok
    if not valid.any():
        return None
    child_sse = np.where(valid, child_sse, np.inf)
    flat = int(child_sse.T.ravel().argmin())  # feature-major tie-breaking
    fpos, cut = divmod(flat, n - 1)
    threshold = 0.5 * (xs[cut, fpos] + xs[cut + 1, fpos])
    return int(feats[fpos]), float(threshold)


def _grow_tree(Z: np.ndarray, y: np.ndarray, idx: np.ndarray, rng: np.random.Generator,
               n_feats: int, min_leaf: int) -> RegressionTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    d = Z.shape[1]

    def build(node_idx: np.ndarray) -> int:
        node = len(feature)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        targets = y[node_idx]
        value.append(float(targets.mean()))
        if node_idx.shape[0] < 2 * min_leaf or (targets == targets[0]).all():
            return node
        feats = rng.choice(d, size=n_feats, replace=False)
        split = _best_split(Z, y, node_idx, feats, min_leaf)
        if split is None:
            return node
        f, thr = split
        go_left = Z[node_idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        left[node] = build(node_idx[go_left])
        right[node] = build(node_idx[~go_left])
        return node

    build(idx)
    return RegressionTree(
        feature=np.array(feature, dtype=np.int32),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int32),
        right=np.array(right, dtype=np.int32),
        value=np.array(value, dtype=np.float64),
    )


def fit_forest(train: list[LabeledSample], B: int = 100, seed: int = 42,
               bootstrap: bool = True, min_samples_leaf: int = 1,
               feature_subsample: int | None = None) -> ForestModel:
    """Grow B trees on bootstrap resamples (n draws with replacement each)."""
    if B < 1:
        raise DataError(f"tree count B must be >= 1, got {B}")
    if min_samples_leaf < 1:
        raise DataError(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")
    X, y = samples_to_arrays(train)
    X, y = canonical_sort(X, y)
    standardizer = fit_standardizer(X)
    Z = apply_standardizer(standardizer, X)
    n, d = Z.shape
    n_feats = feature_subsample if feature_subsample else max(1, d // 3)
    if not (1 <= n_feats <= d):
        raise DataError(f"feature_subsample must lie in [1, {d}], got {n_feats}")

    trees = []
    for stream in np.random.SeedSequence(seed).spawn(B):
        rng = np.random.default_rng(stream)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(_grow_tree(Z, y, np.sort(idx), rng, n_feats, min_samples_leaf))
    return ForestModel(trees=tuple(trees), B=B, seed=int(seed), feature_subsample=n_feats,
                       bootstrap=bootstrap, min_samples_leaf=min_samples_leaf,
                       standardizer=standardizer)


def bootstrap_indices(seed: int, B: int, n: int, bootstrap: bool = True) -> list[np.ndarray]:
    """The exact per-tree training index sets fit_forest(seed, B) samples.

    Exposed so out-of-bag analyses can be run without storing the index sets
    inside the model. Indices refer to canonically sorted training rows.
    """
    out = []
    for stream in np.random.SeedSequence(seed).spawn(B):
        rng = np.random.default_rng(stream)
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        out.append(np.sort(idx))
    return out


def predict_tree(tree: RegressionTree, Z: np.ndarray) -> np.ndarray:
    """Route standardized rows down one tree (vectorized level walk)."""
    node = np.zeros(Z.shape[0], dtype=np.int32)
    active = np.flatnonzero(tree.feature[node] != LEAF)
    while active.size:
        cur = node[active]
        go_left = Z[active, tree.feature[cur]] <= tree.threshold[cur]
        node[active] = np.where(go_left, tree.left[cur], tree.right[cur])
        active = active[tree.feature[node[active]] != LEAF]
    return tree.value[node]


def predict_forest(model: ForestModel, X: np.ndarray) -> np.ndarray:
    Z = apply_standardizer(model.standardizer, np.atleast_2d(X))
    votes = np.stack([predict_tree(tree, Z) for tree in model.trees])
    return votes.mean(axis=0)
