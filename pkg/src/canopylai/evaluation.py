"""MSE/MAE/MAPE metrics and the extractor-by-model results matrix."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import DatasetSplit, LabeledSample
from .errors import DataError, PipelineError
from .regressors import fit_forest, fit_linear, fit_svr, predict_many

EXTRACTOR_ORDER = ("green", "vocab", "embed")
MODEL_ORDER = ("lr", "svm", "rf")


@dataclass(frozen=True)
class Metrics:
    mse: float
    mae: float
    mape: float  # percent


@dataclass(frozen=True)
class ResultsTable:
    rows: tuple[tuple[str, str, Metrics], ...]

    def __post_init__(self):
        pairs = [(e, m) for e, m, _ in self.rows]
        if len(set(pairs)) != len(pairs):
            raise DataError("results table has duplicate (extractor, model) rows")


def compute_metrics(y_true, y_pred) -> Metrics:
    """mse = mean squared error, mae = mean absolute error, mape = percent."""
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape or yt.ndim != 1 or yt.size == 0:
        raise DataError(f"metric inputs must be equal-length non-empty vectors, got {yt.shape} and {yp.shape}")
    if (np.abs(yt) < 1e-12).any():
        raise DataError("MAPE undefined: a true value is zero (or numerically zero)")
    err = yt - yp
    return Metrics(
        mse=float(np.mean(err**2)),
        mae=float(np.mean(np.abs(err))),
        mape=float(100.0 * np.mean(np.abs(err) / np.abs(yt))),
    )


def _fit_for(model_name: str, train: list[LabeledSample], hyper) -> object:
    if model_name == "lr":
        return fit_linear(train)
    if model_name == "svm":
        return fit_svr(train, C=hyper.svr_c, epsilon=hyper.svr_epsilon, gamma=hyper.svr_gamma)
    if model_name == "rf":
        return fit_forest(train, B=hyper.trees, seed=hyper.seed, bootstrap=hyper.bootstrap,
                          min_samples_leaf=hyper.min_samples_leaf,
                          feature_subsample=hyper.feature_subsample)
    raise DataError(f"unknown model name {model_name!r}")


@dataclass(frozen=True)
class MatrixHyperparams:
    """Everything run_matrix needs beyond the data: regressor settings."""

    svr_c: float = 1.0
    svr_epsilon: float = 0.1
    svr_gamma: float | str = "auto"
    trees: int = 100
    min_samples_leaf: int = 1
    bootstrap: bool = True
    feature_subsample: int | None = None
    seed: int = 42


def run_matrix(samples_by_extractor: dict[str, list[LabeledSample]], split: DatasetSplit,
               hyper: MatrixHyperparams | None = None,
               extractors: tuple[str, ...] = EXTRACTOR_ORDER) -> ResultsTable:
    """Train all three models per extractor on the shared split; 9 rows when
    all three extractors are supplied. Every cell sees identical train/test
    indices so the rows are comparable.
    """
    if hyper is None:
        hyper = MatrixHyperparams()
    missing = [e for e in extractors if e not in samples_by_extractor]
    if missing:
        raise DataError(f"missing extractor sample sets: {', '.join(missing)}")
    sizes = {e: len(samples_by_extractor[e]) for e in extractors}
    if len(set(sizes.values())) != 1:
        raise DataError(f"extractor sample sets cover different crops: {sizes}")
    n = next(iter(sizes.values()))
    if split.train_indices.max(initial=-1) >= n or split.test_indices.max(initial=-1) >= n:
        raise DataError(f"split indices exceed dataset size {n}")

    rows = []
    for extractor in extractors:
        samples = samples_by_extractor[extractor]
        train = [samples[i] for i in split.train_indices]
        test = [samples[i] for i in split.test_indices]
        X_test = np.stack([s.features for s in test])
        y_test = np.array([s.lai for s in test])
        for model_name in MODEL_ORDER:
            try:
                model = _fit_for(model_name, train, hyper)
                y_pred = predict_many(model, X_test)
                metrics = compute_metrics(y_test, y_pred)
            except PipelineError as exc:
                raise type(exc)(f"matrix cell ({extractor}, {model_name}): {exc}") from exc
            rows.append((extractor, model_name, metrics))
    return ResultsTable(rows=tuple(rows))


def render_table(table: ResultsTable, format: str = "text") -> str:
    """Render with stable row order; csv header `extractor,model,mse,mae,mape`."""
    if format == "csv":
        lines = ["extractor,model,mse,mae,mape"]
        for e, m, met in table.rows:
            lines.append(f"{e},{m},{met.mse!r},{met.mae!r},{met.mape!r}")
        return "\n".join(lines) + "\n"
    if format == "json":
        payload = {"rows": [
            {"extractor": e, "model": m, "mse": met.mse, "mae": met.mae, "mape": met.mape}
            for e, m, met in table.rows
        ]}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if format == "text":
        header = f"{'extractor':<10} {'model':<6} {'mse':>9} {'mae':>9} {'mape':>9}"
        lines = [header, "-" * len(header)]
        for e, m, met in table.rows:
            lines.append(f"{e:<10} {m:<6} {met.mse:>9.4f} {met.mae:>9.4f} {met.mape:>8.2f}%")
        return "\n".join(lines) + "\n"
    raise DataError(f"unknown table format {format!r} (want text, csv or json)")
