"""Training-data preparation shared by all regressors: sample-to-matrix
conversion, canonical row ordering, and z-score standardization.

Every fit routine sorts its training rows into a canonical lexicographic
order before any arithmetic. Floating-point sums depend on operand order, so
this is what makes training exactly invariant to the order rows arrive in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import LabeledSample
from ..errors import DataError


@dataclass(frozen=True)
class StandardizerParams:
    """Per-feature z-score parameters fitted on the training set."""

    mean: np.ndarray
    std: np.ndarray  # constant features get std pinned to 1

    @property
    def dimension(self) -> int:
        return self.mean.shape[0]


def samples_to_arrays(samples: list[LabeledSample], min_rows: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Stack samples into (X, y) float64 arrays, validating shape agreement."""
    if len(samples) < min_rows:
        raise DataError(f"need at least {min_rows} training samples, got {len(samples)}")
    dims = {s.features.shape[0] for s in samples}
    if len(dims) != 1:
        raise DataError(f"inconsistent feature dimensions in training set: {sorted(dims)}")
    if 0 in dims:
        raise DataError("feature vectors are empty")
    X = np.stack([s.features for s in samples]).astype(np.float64)
    y = np.array([s.lai for s in samples], dtype=np.float64)
    return X, y


def canonical_sort(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort rows lexicographically by features then label; returns copies."""
    keys = (y,) + tuple(X[:, col] for col in range(X.shape[1] - 1, -1, -1))
    order = np.lexsort(keys)
    return X[order], y[order]


def fit_standardizer(X: np.ndarray) -> StandardizerParams:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return StandardizerParams(mean=mean, std=np.where(std > 0, std, 1.0))


def apply_standardizer(params: StandardizerParams, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != params.dimension:
        raise DataError(f"feature dimension {X.shape[-1]} does not match model's {params.dimension}")
    return (X - params.mean) / params.std


def identity_standardizer(dimension: int) -> StandardizerParams:
    return StandardizerParams(mean=np.zeros(dimension), std=np.ones(dimension))
