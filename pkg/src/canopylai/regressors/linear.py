"""Ordinary least squares on standardized features via the normal equations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..dataset import LabeledSample
from ..errors import ComputationError
from .prepare import StandardizerParams, apply_standardizer, canonical_sort, fit_standardizer, samples_to_arrays

RIDGE = 1e-8


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coefficients: np.ndarray
    standardizer: StandardizerParams
    ridge: float = 0.0  # nonzero when the Gram matrix needed stabilizing
    extractor: str = ""


def fit_linear(train: list[LabeledSample]) -> LinearModel:
    """Least squares fit; a singular Gram matrix gets a recorded ridge term."""
    X, y = samples_to_arrays(train)
    X, y = canonical_sort(X, y)
    standardizer = fit_standardizer(X)
    Z = apply_standardizer(standardizer, X)
    n, d = Z.shape
    A = np.concatenate([np.ones((n, 1)), Z], axis=1)
    gram = A.T @ A
    rhs = A.T @ y

    # certain singularity: underdetermined system or an exactly constant column
    ridge = RIDGE if (n < d + 1 or (Z.std(axis=0) == 0).any()) else 0.0
    theta = None
    if ridge == 0.0:
        try:
            theta = cho_solve(cho_factor(gram), rhs)
        except LinAlgError:
            ridge = RIDGE
    if theta is None:
        try:
            theta = cho_solve(cho_factor(gram + ridge * np.eye(d + 1)), rhs)
        except LinAlgError as exc:
            raise ComputationError(f"normal equations unsolvable even with ridge {ridge}: {exc}") from exc
    if not np.all(np.isfinite(theta)):
        raise ComputationError("least-squares solution is not finite")
    return LinearModel(intercept=float(theta[0]), coefficients=theta[1:].copy(),
                       standardizer=standardizer, ridge=ridge)


def predict_linear(model: LinearModel, X: np.ndarray) -> np.ndarray:
    Z = apply_standardizer(model.standardizer, np.atleast_2d(X))
    return model.intercept + Z @ model.coefficients
