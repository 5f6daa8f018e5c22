"""Three LAI regressors with a uniform fit/predict/serialize contract."""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .forest import ForestModel, RegressionTree, bootstrap_indices, fit_forest, predict_forest, predict_tree
from .linear import LinearModel, fit_linear, predict_linear
from .prepare import (StandardizerParams, apply_standardizer, canonical_sort,
                      fit_standardizer, identity_standardizer, samples_to_arrays)
from .serialize import Model, load_model, save_model
from .svr import SvrModel, fit_svr, predict_svr, rbf_kernel

__all__ = [
    "StandardizerParams", "LinearModel", "SvrModel", "ForestModel", "RegressionTree", "Model",
    "fit_linear", "fit_svr", "fit_forest",
    "predict", "predict_many", "predict_linear", "predict_svr", "predict_forest", "predict_tree",
    "save_model", "load_model", "bootstrap_indices", "rbf_kernel",
    "apply_standardizer", "canonical_sort", "fit_standardizer", "identity_standardizer", "samples_to_arrays",
]

_PREDICTORS = {
    LinearModel: predict_linear,
    SvrModel: predict_svr,
    ForestModel: predict_forest,
}


def predict_many(model: Model, X: np.ndarray) -> np.ndarray:
    """Predict LAI for a batch of raw (unstandardized) feature rows."""
    fn = _PREDICTORS.get(type(model))
    if fn is None:
        raise DataError(f"cannot predict with object of type {type(model).__name__}")
    out = fn(model, np.atleast_2d(np.asarray(X, dtype=np.float64)))
    if not np.all(np.isfinite(out)):
        raise DataError("model produced a non-finite prediction")
    return out


def predict(model: Model, features: np.ndarray) -> float:
    """Predict LAI for a single feature vector."""
    return float(predict_many(model, np.asarray(features, dtype=np.float64).reshape(1, -1))[0])
