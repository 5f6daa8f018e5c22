"""Pipeline configuration: defaults for every stage plus a TOML loader.

Example config file:

    [paths]
    annotations = "data/annotations.csv"
    image_root = "data"
    output_dir = "out"
    embedding_file = "out/embeddings.emb"   # optional
    model_file = "models/backbone.onnx"     # optional

    [split]
    test_fraction = 0.2
    seed = 42

    [green]
    binary_cutoff = 50
    low_threshold = 50.0
    high_threshold = 150.0
    blur_sigma = 1.4
    blur_kernel = 5
    hue_low = 70.0
    hue_high = 170.0
    min_s = 0.15
    min_v = 0.10

    [vocab]
    bins_per_channel = 8
    glcm_levels = 32
    glcm_offset = [1, 0]

    [embed]
    input_size = 224
    mean = [0.485, 0.456, 0.406]
    std = [0.229, 0.224, 0.225]
    batch_size = 8

    [regressors]
    svr_c = 1.0
    svr_epsilon = 0.1
    svr_gamma = "auto"
    trees = 100
    min_samples_leaf = 1
    bootstrap = true

    [evaluate]
    extractors = ["green", "vocab", "embed"]

Unknown keys raise DataError so typos never silently fall back to defaults.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .embeddings import EmbedConfig
from .errors import DataError
from .green import GreenPipelineConfig
from .imgproc import EdgeParams


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.2
    seed: int = 42


@dataclass(frozen=True)
class VocabConfig:
    bins_per_channel: int = 8
    glcm_levels: int = 32
    glcm_offset: tuple[int, int] = (1, 0)


@dataclass(frozen=True)
class RegressorConfig:
    svr_c: float = 1.0
    svr_epsilon: float = 0.1
    svr_gamma: float | str = "auto"
    trees: int = 100
    min_samples_leaf: int = 1
    bootstrap: bool = True
    feature_subsample: int | None = None


@dataclass(frozen=True)
class PipelineConfig:
    annotations: Path | None = None
    image_root: Path | None = None
    output_dir: Path = Path("out")
    embedding_file: Path | None = None
    model_file: Path | None = None
    green: GreenPipelineConfig = field(default_factory=GreenPipelineConfig)
    vocab: VocabConfig = field(default_factory=VocabConfig)
    embed: EmbedConfig = field(default_factory=EmbedConfig)
    regressors: RegressorConfig = field(default_factory=RegressorConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    extractors: tuple[str, ...] = ("green", "vocab", "embed")


def _section(data: dict, name: str, allowed: set[str]) -> dict:
    section = data.pop(name, {})
    if not isinstance(section, dict):
        raise DataError(f"config section [{name}] must be a table")
    unknown = set(section) - allowed
    if unknown:
        raise DataError(f"config section [{name}] has unknown keys: {', '.join(sorted(unknown))}")
    return section


def _path_or_none(section: dict, key: str, base: Path) -> Path | None:
    value = section.get(key)
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(file: str | Path) -> PipelineConfig:
    """Parse a TOML config; relative paths resolve against the file's folder."""
    path = Path(file)
    if not path.is_file():
        raise DataError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"config file {path}: {exc}") from exc
    base = path.parent

    paths = _section(data, "paths", {"annotations", "image_root", "output_dir", "embedding_file", "model_file"})
    split = _section(data, "split", {"test_fraction", "seed"})
    green = _section(data, "green", {"binary_cutoff", "low_threshold", "high_threshold",
                                     "blur_sigma", "blur_kernel", "hue_low", "hue_high", "min_s", "min_v"})
    vocab = _section(data, "vocab", {"bins_per_channel", "glcm_levels", "glcm_offset"})
    embed = _section(data, "embed", {"input_size", "mean", "std", "batch_size"})
    reg = _section(data, "regressors", {"svr_c", "svr_epsilon", "svr_gamma", "trees",
                                        "min_samples_leaf", "bootstrap", "feature_subsample"})
    evaluate = _section(data, "evaluate", {"extractors"})
    if data:
        raise DataError(f"config file {path}: unknown sections: {', '.join(sorted(data))}")

    offset = vocab.get("glcm_offset", (1, 0))
    if not (isinstance(offset, (list, tuple)) and len(offset) == 2):
        raise DataError(f"config: vocab.glcm_offset must be a [dx, dy] pair, got {offset!r}")
    extractors = evaluate.get("extractors", ["green", "vocab", "embed"])
    for name in extractors:
        if name not in ("green", "vocab", "embed"):
            raise DataError(f"config: unknown extractor {name!r} in evaluate.extractors")
    gamma = reg.get("svr_gamma", "auto")
    if isinstance(gamma, str):
        if gamma != "auto":
            raise DataError(f"config: regressors.svr_gamma must be a number or \"auto\", got {gamma!r}")
    else:
        gamma = float(gamma)

    defaults_green = GreenPipelineConfig()
    defaults_edge = defaults_green.edge
    edge = EdgeParams(
        low_threshold=float(green.get("low_threshold", defaults_edge.low_threshold)),
        high_threshold=float(green.get("high_threshold", defaults_edge.high_threshold)),
        blur_sigma=float(green.get("blur_sigma", defaults_edge.blur_sigma)),
        blur_kernel=int(green.get("blur_kernel", defaults_edge.blur_kernel)),
    )
    return PipelineConfig(
        annotations=_path_or_none(paths, "annotations", base),
        image_root=_path_or_none(paths, "image_root", base),
        output_dir=_path_or_none(paths, "output_dir", base) or (base / "out"),
        embedding_file=_path_or_none(paths, "embedding_file", base),
        model_file=_path_or_none(paths, "model_file", base),
        green=GreenPipelineConfig(
            binary_cutoff=int(green.get("binary_cutoff", defaults_green.binary_cutoff)),
            edge=edge,
            hue_range=(float(green.get("hue_low", defaults_green.hue_range[0])),
                       float(green.get("hue_high", defaults_green.hue_range[1]))),
            min_s=float(green.get("min_s", defaults_green.min_s)),
            min_v=float(green.get("min_v", defaults_green.min_v)),
        ),
        vocab=VocabConfig(
            bins_per_channel=int(vocab.get("bins_per_channel", 8)),
            glcm_levels=int(vocab.get("glcm_levels", 32)),
            glcm_offset=(int(offset[0]), int(offset[1])),
        ),
        embed=EmbedConfig(
            mean=tuple(float(v) for v in embed.get("mean", EmbedConfig.mean)),
            std=tuple(float(v) for v in embed.get("std", EmbedConfig.std)),
            input_size=int(embed.get("input_size", EmbedConfig.input_size)),
            batch_size=int(embed.get("batch_size", EmbedConfig.batch_size)),
        ),
        regressors=RegressorConfig(
            svr_c=float(reg.get("svr_c", 1.0)),
            svr_epsilon=float(reg.get("svr_epsilon", 0.1)),
            svr_gamma=gamma,
            trees=int(reg.get("trees", 100)),
            min_samples_leaf=int(reg.get("min_samples_leaf", 1)),
            bootstrap=bool(reg.get("bootstrap", True)),
            feature_subsample=(int(reg["feature_subsample"]) if "feature_subsample" in reg else None),
        ),
        split=SplitConfig(
            test_fraction=float(split.get("test_fraction", 0.2)),
            seed=int(split.get("seed", 42)),
        ),
        extractors=tuple(extractors),
    )
