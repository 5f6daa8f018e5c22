"""Command-line pipeline: `extract` features, `train` a regressor, `evaluate`
the extractor-by-model matrix, and `predict` LAI for one plant bbox.

Exit codes: 0 success, 1 usage error, 2 data error, 3 computation error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import PipelineConfig, load_config
from .dataset import (AnnotationRecord, LabeledSample, PlantCrop, clamp_bbox, extract_crops,
                      load_image_rgb, parse_annotations, split_dataset)
from .embeddings import embeddings_to_samples, load_embeddings, run_embedding_model
from .errors import ComputationError, DataError, PipelineError
from .evaluation import MODEL_ORDER, MatrixHyperparams, compute_metrics, render_table, run_matrix
from .feature_io import read_features, write_features
from .green import extract_green_features
from .regressors import fit_forest, fit_linear, fit_svr, load_model, predict, predict_many, save_model
from .vocab import vocab_features

EXTRACTORS = ("green", "vocab", "embed")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is taken by data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="canopylai", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_extract = sub.add_parser("extract", help="compute features for every annotated crop")
    p_extract.add_argument("--config", required=True, help="pipeline config (TOML)")
    p_extract.add_argument("--extractor", required=True, choices=EXTRACTORS)
    p_extract.add_argument("--out", help="feature csv path (default <output_dir>/features_<extractor>.csv)")

    p_train = sub.add_parser("train", help="train one regressor on a feature file's train split")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--model", required=True, choices=MODEL_ORDER)
    p_train.add_argument("--features", help="feature csv (default <output_dir>/features_<extractor>.csv)")
    p_train.add_argument("--extractor", choices=EXTRACTORS,
                         help="extractor to record in the model file (default: inferred from dimension)")
    p_train.add_argument("--seed", type=int, help="override the split/forest seed")
    p_train.add_argument("--out", help="model file path (default <output_dir>/model_<model>_<extractor>.laim)")

    p_eval = sub.add_parser("evaluate", help="train and score every extractor x model cell")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--seed", type=int, help="override the split/forest seed")
    p_eval.add_argument("--out", help="directory for results.{txt,csv,json} (default <output_dir>)")

    p_pred = sub.add_parser("predict", help="predict LAI for one bbox of one image")
    p_pred.add_argument("model_file", help="trained model container")
    p_pred.add_argument("image", help="source image")
    p_pred.add_argument("--bbox", required=True, nargs=4, type=int, metavar=("X", "Y", "W", "H"))
    p_pred.add_argument("--config", help="pipeline config (needed for embed models and non-default params)")
    return parser


def _extract_samples(config: PipelineConfig, extractor: str) -> list[LabeledSample]:
    if config.annotations is None or config.image_root is None:
        raise DataError("config must set paths.annotations and paths.image_root to extract features")
    records = parse_annotations(config.annotations)
    crops = extract_crops(records, config.image_root)
    if extractor == "embed":
        if config.embedding_file is not None and Path(config.embedding_file).is_file():
            store = load_embeddings(config.embedding_file)
        elif config.model_file is not None:
            store = run_embedding_model(crops, config.model_file, config.embed)
        else:
            raise DataError("embed extractor needs paths.embedding_file or paths.model_file in the config")
        return embeddings_to_samples(store, records)
    samples = []
    for crop in crops:
        try:
            if extractor == "green":
                vec = extract_green_features(crop, config.green).to_vector()
            elif extractor == "vocab":
                vec = vocab_features(crop, config.vocab.bins_per_channel,
                                     config.vocab.glcm_levels, config.vocab.glcm_offset)
            else:
                raise DataError(f"unknown extractor {extractor!r}")
        except PipelineError as exc:
            raise type(exc)(f"crop {crop.crop_id!r}: {exc}") from exc
        samples.append(LabeledSample(features=vec, lai=crop.origin.lai, crop_id=crop.crop_id))
    return samples


def _default_feature_path(config: PipelineConfig, extractor: str) -> Path:
    return Path(config.output_dir) / f"features_{extractor}.csv"


def _infer_extractor(dimension: int) -> str:
    if dimension == 6:
        return "green"
    if dimension == 522:
        return "vocab"
    return "embed"


def cmd_extract(args) -> int:
    config = load_config(args.config)
    samples = _extract_samples(config, args.extractor)
    out = Path(args.out) if args.out else _default_feature_path(config, args.extractor)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_features(samples, out)
    print(f"wrote {len(samples)} rows x {samples[0].features.shape[0]} features to {out}")
    return 0


def cmd_train(args) -> int:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.split.seed
    if args.features:
        feature_path = Path(args.features)
    elif args.extractor:
        feature_path = _default_feature_path(config, args.extractor)
    else:
        raise DataError("train needs --features or --extractor to locate the feature file")
    samples = read_features(feature_path)
    split = split_dataset(samples, config.split.test_fraction, seed)
    train = [samples[i] for i in split.train_indices]
    reg = config.regressors
    if args.model == "lr":
        model = fit_linear(train)
    elif args.model == "svm":
        model = fit_svr(train, C=reg.svr_c, epsilon=reg.svr_epsilon, gamma=reg.svr_gamma)
    else:
        model = fit_forest(train, B=reg.trees, seed=seed, bootstrap=reg.bootstrap,
                           min_samples_leaf=reg.min_samples_leaf,
                           feature_subsample=reg.feature_subsample)
    extractor = args.extractor or _infer_extractor(samples[0].features.shape[0])
    model = replace(model, extractor=extractor)
    out = Path(args.out) if args.out else Path(config.output_dir) / f"model_{args.model}_{extractor}.laim"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    y_train = np.array([s.lai for s in train])
    metrics = compute_metrics(y_train, predict_many(model, np.stack([s.features for s in train])))
    print(f"trained {args.model} on {len(train)} rows ({extractor} features) -> {out}")
    print(f"train mse={metrics.mse:.6g} mae={metrics.mae:.6g} mape={metrics.mape:.4g}%")
    return 0


def cmd_evaluate(args) -> int:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.split.seed
    out_dir = Path(args.out) if args.out else Path(config.output_dir)

    problems = []
    for extractor in config.extractors:
        if _default_feature_path(config, extractor).is_file():
            continue
        if config.annotations is None or not Path(config.annotations).is_file():
            problems.append(f"{extractor}: feature file missing and paths.annotations unavailable")
        elif config.image_root is None or not Path(config.image_root).is_dir():
            problems.append(f"{extractor}: feature file missing and paths.image_root unavailable")
        elif extractor == "embed" and not (
                (config.embedding_file is not None and Path(config.embedding_file).is_file())
                or (config.model_file is not None and Path(config.model_file).is_file())):
            problems.append("embed: feature file missing and neither paths.embedding_file "
                            "nor paths.model_file is available")
    if problems:
        raise DataError("cannot evaluate, missing inputs: " + "; ".join(problems))

    samples_by_extractor = {}
    for extractor in config.extractors:
        path = _default_feature_path(config, extractor)
        if path.is_file():
            samples_by_extractor[extractor] = read_features(path)
        else:
            samples_by_extractor[extractor] = _extract_samples(config, extractor)

    ids = None
    for extractor, samples in samples_by_extractor.items():
        got = [s.crop_id for s in samples]
        if ids is None:
            ids = got
        elif got != ids:
            raise DataError(f"feature sets disagree on crops: {extractor} does not match the others")
    split = split_dataset(samples_by_extractor[config.extractors[0]], config.split.test_fraction, seed)
    reg = config.regressors
    hyper = MatrixHyperparams(svr_c=reg.svr_c, svr_epsilon=reg.svr_epsilon, svr_gamma=reg.svr_gamma,
                              trees=reg.trees, min_samples_leaf=reg.min_samples_leaf,
                              bootstrap=reg.bootstrap, feature_subsample=reg.feature_subsample,
                              seed=seed)
    table = run_matrix(samples_by_extractor, split, hyper, extractors=config.extractors)

    out_dir.mkdir(parents=True, exist_ok=True)
    for fmt, suffix in (("text", "txt"), ("csv", "csv"), ("json", "json")):
        (out_dir / f"results.{suffix}").write_text(render_table(table, fmt), encoding="utf-8")
    print(render_table(table, "text"), end="")
    print(f"results written to {out_dir}/results.{{txt,csv,json}}")
    return 0


def cmd_predict(args) -> int:
    config = load_config(args.config) if args.config else PipelineConfig()
    model = load_model(args.model_file)
    extractor = model.extractor or _infer_extractor(model.standardizer.dimension)

    pixels = load_image_rgb(args.image)
    x, y, w, h = args.bbox
    if w <= 0 or h <= 0:
        raise DataError(f"bbox w and h must be positive, got {w}x{h}")
    height, width = pixels.shape[:2]
    x0, y0, x1, y1 = clamp_bbox(x, y, w, h, width, height)
    if x1 <= x0 or y1 <= y0:
        raise DataError(f"bbox ({x},{y},{w},{h}) lies outside the {width}x{height} image")
    image_path = Path(args.image)
    record = AnnotationRecord(image=image_path.name, x=x, y=y, w=w, h=h, lai=1.0,
                              crop_id=f"{image_path.stem}_0000")
    crop = PlantCrop(pixels=pixels[y0:y1, x0:x1].copy(), origin=record)

    if extractor == "green":
        features = extract_green_features(crop, config.green).to_vector()
    elif extractor == "vocab":
        features = vocab_features(crop, config.vocab.bins_per_channel,
                                  config.vocab.glcm_levels, config.vocab.glcm_offset)
    else:
        if config.model_file is None:
            raise DataError("predicting with an embed model needs --config with paths.model_file "
                            "pointing at the serialized network graph")
        store = run_embedding_model([crop], config.model_file, config.embed)
        features = np.asarray(store.entries[crop.crop_id], dtype=np.float64)
    if features.shape[0] != model.standardizer.dimension:
        raise DataError(f"model expects {model.standardizer.dimension} features but the "
                        f"{extractor} extractor produced {features.shape[0]}")
    print(predict(model, features))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"extract": cmd_extract, "train": cmd_train, "evaluate": cmd_evaluate, "predict": cmd_predict}
    try:
        return handlers[args.command](args)
    except ComputationError as exc:
        print(f"canopylai {args.command}: computation error: {exc}", file=sys.stderr)
        return 3
    except PipelineError as exc:
        print(f"canopylai {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"canopylai {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
