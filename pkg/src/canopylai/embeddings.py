"""CNN embedding features: load precomputed embedding files, or execute a
serialized inference graph over crops resized to the graph's declared input.

Embedding file formats (chosen by extension on load, `.csv` vs anything else):
  binary: magic `EMB1`, u32 dimension D, u32 count N, then N records of
          [u16 id byte-length, UTF-8 crop id, D little-endian float32]
  csv:    header `crop_id,v0,...,v{D-1}`, one row per crop, `.` decimal

Preprocessing before graph execution: pixels / 255, bilinear resize (half-pixel
convention, no antialiasing), per-channel (x - mean) / std, then CHW layout.
The mean/std constants live in EmbedConfig, not in the code paths.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import AnnotationRecord, LabeledSample, PlantCrop
from .errors import ComputationError, DataError
from .onnx_runtime import execute_graph, load_graph

_MAGIC = b"EMB1"

# channel statistics of the standard large-scale pretraining corpus
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass(frozen=True)
class EmbedConfig:
    mean: tuple[float, float, float] = IMAGENET_MEAN
    std: tuple[float, float, float] = IMAGENET_STD
    input_size: int = 224  # fallback when the graph declares dynamic spatial dims
    batch_size: int = 8


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable crop_id -> vector map with one shared dimension."""

    dimension: int
    entries: dict[str, np.ndarray]  # values are float32, length = dimension
    source: str  # "file" or "model-run"

    def __len__(self) -> int:
        return len(self.entries)


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample of an (H, W, C) float image, half-pixel centers."""
    h, w = img.shape[:2]
    if (h, w) == (out_h, out_w):
        return img.copy()
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None, None]
    wx = (xs - x0)[None, :, None]
    rows = img[y0] * (1.0 - wy) + img[y1] * wy
    return rows[:, x0] * (1.0 - wx) + rows[:, x1] * wx


def preprocess_crop(pixels: np.ndarray, out_h: int, out_w: int, config: EmbedConfig) -> np.ndarray:
    """Crop pixels -> normalized (3, out_h, out_w) float32 network input."""
    x = np.asarray(pixels, dtype=np.float64) / 255.0
    x = resize_bilinear(x, out_h, out_w)
    x = (x - np.asarray(config.mean)) / np.asarray(config.std)
    return x.transpose(2, 0, 1).astype(np.float32)


def write_embeddings(store: EmbeddingStore, file: str | Path) -> None:
    """Write the store in the binary format, or CSV when the path ends .csv."""
    path = Path(file)
    if path.suffix.lower() == ".csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["crop_id"] + [f"v{i}" for i in range(store.dimension)])
            for crop_id, vec in store.entries.items():
                writer.writerow([crop_id] + [str(v) for v in vec])
        return
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", store.dimension, len(store.entries)))
        for crop_id, vec in store.entries.items():
            ident = crop_id.encode("utf-8")
            if len(ident) > 0xFFFF:
                raise DataError(f"crop id too long to serialize: {crop_id[:40]!r}...")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(np.asarray(vec, dtype="<f4").tobytes())


def _load_embeddings_csv(path: Path) -> EmbeddingStore:
    entries: dict[str, np.ndarray] = {}
    dimension = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "crop_id":
            raise DataError(f"embedding csv {path}: missing `crop_id,...` header")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            crop_id = row[0]
            if crop_id in entries:
                raise DataError(f"embedding csv {path}: duplicate crop id {crop_id!r}")
            if dimension is None:
                dimension = len(row) - 1
                if dimension < 1:
                    raise DataError(f"embedding csv {path}: row {crop_id!r} has no values")
            elif len(row) - 1 != dimension:
                raise DataError(
                    f"embedding csv {path}: row {crop_id!r} has {len(row) - 1} values, expected {dimension}")
            try:
                entries[crop_id] = np.array(row[1:], dtype=np.float32)
            except ValueError:
                raise DataError(f"embedding csv {path} line {line_no}: unparseable value") from None
    if dimension is None:
        raise DataError(f"embedding csv {path}: no data rows")
    return EmbeddingStore(dimension=dimension, entries=entries, source="file")


def load_embeddings(file: str | Path) -> EmbeddingStore:
    """Read an embedding file (binary or csv by extension) into a store."""
    path = Path(file)
    if not path.is_file():
        raise DataError(f"embedding file not found: {path}")
    if path.suffix.lower() == ".csv":
        return _load_embeddings_csv(path)
    blob = path.read_bytes()
    if blob[:4] != _MAGIC:
        raise DataError(f"embedding file {path}: bad magic {blob[:4]!r}, expected {_MAGIC!r}")
    if len(blob) < 12:
        raise DataError(f"embedding file {path}: truncated header")
    dimension, count = struct.unpack_from("<II", blob, 4)
    if dimension < 1:
        raise DataError(f"embedding file {path}: dimension must be >= 1, got {dimension}")
    entries: dict[str, np.ndarray] = {}
    pos = 12
    vec_bytes = 4 * dimension
    for i in range(count):
        if pos + 2 > len(blob):
            raise DataError(f"embedding file {path}: truncated at record {i}")
        (id_len,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        if pos + id_len + vec_bytes > len(blob):
            raise DataError(f"embedding file {path}: truncated at record {i}")
        crop_id = blob[pos:pos + id_len].decode("utf-8")
        pos += id_len
        if crop_id in entries:
            raise DataError(f"embedding file {path}: duplicate crop id {crop_id!r}")
        entries[crop_id] = np.frombuffer(blob, dtype="<f4", count=dimension, offset=pos).astype(np.float32)
        pos += vec_bytes
    if pos != len(blob):
        raise DataError(f"embedding file {path}: {len(blob) - pos} trailing bytes")
    return EmbeddingStore(dimension=dimension, entries=entries, source="file")


def run_embedding_model(crops: list[PlantCrop], model_file: str | Path,
                        config: EmbedConfig | None = None) -> EmbeddingStore:
    """Execute a serialized graph over crops, in order, deterministic batches."""
    if config is None:
        config = EmbedConfig()
    graph = load_graph(model_file)
    shape = graph.input_shape
    if shape and len(shape) != 4:
        raise DataError(f"graph input must be rank-4 (N,C,H,W), declared {shape}")
    in_h = shape[2] if shape and shape[2] else config.input_size
    in_w = shape[3] if shape and shape[3] else config.input_size
    if shape and shape[1] not in (None, 3):
        raise DataError(f"graph expects {shape[1]} input channels, crops have 3")

    ids = [c.crop_id for c in crops]
    if len(set(ids)) != len(ids):
        raise DataError("duplicate crop ids in embedding batch")
    outputs: list[np.ndarray] = []
    for start in range(0, len(crops), config.batch_size):
        chunk = crops[start:start + config.batch_size]
        batch = np.stack([preprocess_crop(c.pixels, in_h, in_w, config) for c in chunk])
        out = execute_graph(graph, batch)
        if out.ndim != 2:
            raise ComputationError(f"graph output must be rank 2, got shape {out.shape}")
        if out.shape[0] != len(chunk):
            raise ComputationError(
                f"graph returned {out.shape[0]} rows for a batch of {len(chunk)}")
        outputs.append(np.asarray(out, dtype=np.float32))
    if not outputs:
        return EmbeddingStore(dimension=0, entries={}, source="model-run")
    stacked = np.concatenate(outputs, axis=0)
    entries = {crop_id: stacked[i].copy() for i, crop_id in enumerate(ids)}
    return EmbeddingStore(dimension=int(stacked.shape[1]), entries=entries, source="model-run")


def embeddings_to_samples(store: EmbeddingStore, records: list[AnnotationRecord]) -> list[LabeledSample]:
    """Pair each record's embedding with its LAI label, ordered as records."""
    samples = []
    for rec in records:
        vec = store.entries.get(rec.crop_id)
        if vec is None:
            raise DataError(f"embedding store has no entry for crop id {rec.crop_id!r}")
        samples.append(LabeledSample(features=np.asarray(vec, dtype=np.float64), lai=rec.lai, crop_id=rec.crop_id))
    return samples
