"""Annotation parsing, per-plant crop extraction, splits and label statistics.

The annotation file is a UTF-8 CSV with header ``image,x,y,w,h,lai``: one
plant per row, bbox in pixel coordinates of the source image, image paths
relative to the image root. Each row is assigned a stable crop id
``<image stem>_<row index:04d>`` (0-based index over data rows, file order);
every downstream artifact (feature files, embedding stores) is keyed by it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DataError

ANNOTATION_COLUMNS = ("image", "x", "y", "w", "h", "lai")


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotated plant: source image, bounding box, measured LAI."""

    image: str
    x: int
    y: int
    w: int
    h: int
    lai: float
    crop_id: str

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise DataError(f"record {self.crop_id!r}: bbox w and h must be positive, got {self.w}x{self.h}")
        if not (self.lai > 0) or not np.isfinite(self.lai):
            raise DataError(f"record {self.crop_id!r}: lai must be a finite positive number, got {self.lai}")


@dataclass(frozen=True)
class PlantCrop:
    """An RGB crop cut from a source image, 8 bits per channel, exact pixels."""

    pixels: np.ndarray  # (height, width, 3) uint8
    origin: AnnotationRecord

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8 or p.shape[0] < 1 or p.shape[1] < 1:
            raise DataError(f"crop {self.crop_id!r}: pixel buffer must be non-empty (H, W, 3) uint8")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def crop_id(self) -> str:
        return self.origin.crop_id


@dataclass(frozen=True)
class LabeledSample:
    """A feature vector paired with its ground-truth LAI."""

    features: np.ndarray  # 1-D float64
    lai: float
    crop_id: str = ""

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        if f.ndim != 1:
            raise DataError(f"sample {self.crop_id!r}: features must be a 1-D vector")
        if not np.all(np.isfinite(f)):
            raise DataError(f"sample {self.crop_id!r}: features contain NaN/Inf")
        object.__setattr__(self, "features", f)


@dataclass(frozen=True)
class DatasetStats:
    count: int
    mean: float
    std_dev: float
    min: float
    max: float


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train/test index sets covering the whole dataset."""

    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int

    def __post_init__(self):
        tr = np.asarray(self.train_indices, dtype=np.intp)
        te = np.asarray(self.test_indices, dtype=np.intp)
        if tr.size == 0 or te.size == 0:
            raise DataError("split must leave both train and test non-empty")
        if np.intersect1d(tr, te).size:
            raise DataError("train and test indices overlap")
        object.__setattr__(self, "train_indices", tr)
        object.__setattr__(self, "test_indices", te)


def _parse_pixel_field(raw: str, name: str, line_no: int) -> int:
    try:
        value = float(raw)
    except ValueError:
        raise DataError(f"annotation line {line_no}: column {name!r} is not numeric: {raw!r}") from None
    if value != int(value):
        raise DataError(f"annotation line {line_no}: column {name!r} must be a whole pixel count, got {raw!r}")
    return int(value)


def parse_annotations(file: str | Path) -> list[AnnotationRecord]:
    """Read the annotation CSV into records, one per data row, in file order.

    Raises DataError naming the 1-based line number for any malformed row
    (wrong column count, non-numeric bbox/LAI) or invalid LAI (must be > 0).
    """
    path = Path(file)
    if not path.is_file():
        raise DataError(f"annotation file not found: {path}")
    records: list[AnnotationRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"annotation file {path} is empty (missing header)") from None
        if [c.strip().lower() for c in header] != list(ANNOTATION_COLUMNS):
            raise DataError(
                f"annotation file {path}: expected header {','.join(ANNOTATION_COLUMNS)!r}, got {','.join(header)!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise DataError(f"annotation line {line_no}: expected 6 columns, got {len(row)}")
            image = row[0].strip()
            if not image:
                raise DataError(f"annotation line {line_no}: empty image path")
            x = _parse_pixel_field(row[1], "x", line_no)
            y = _parse_pixel_field(row[2], "y", line_no)
            w = _parse_pixel_field(row[3], "w", line_no)
            h = _parse_pixel_field(row[4], "h", line_no)
            try:
                lai = float(row[5])
            except ValueError:
                raise DataError(f"annotation line {line_no}: column 'lai' is not numeric: {row[5]!r}") from None
            crop_id = f"{Path(image).stem}_{len(records):04d}"
            if w <= 0 or h <= 0:
                raise DataError(f"annotation line {line_no}: bbox w and h must be positive, got {w}x{h}")
            if not (lai > 0) or not np.isfinite(lai):
                raise DataError(f"annotation line {line_no}: lai must be > 0, got {row[5]!r}")
            records.append(AnnotationRecord(image=image, x=x, y=y, w=w, h=h, lai=lai, crop_id=crop_id))
    if not records:
        raise DataError(f"annotation file {path} has no data rows")
    return records


def load_image_rgb(path: str | Path) -> np.ndarray:
    """Load a PNG/JPEG as (H, W, 3) uint8, dropping any alpha channel."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"source image not found: {path}")
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except DataError:
        raise
    except Exception as exc:
        raise DataError(f"cannot load image {path}: {exc}") from exc


def clamp_bbox(x: int, y: int, w: int, h: int, width: int, height: int) -> tuple[int, int, int, int]:
    """Clamp a bbox to image bounds; returns (x0, y0, x1, y1) with x1/y1 exclusive."""
    x0 = max(x, 0)
    y0 = max(y, 0)
    x1 = min(x + w, width)
    y1 = min(y + h, height)
    return x0, y0, x1, y1


def extract_crops(records: list[AnnotationRecord], image_root: str | Path) -> list[PlantCrop]:
    """Cut one crop per record, clamping bboxes to image bounds, pixels untouched.

    Source images are loaded once each and shared across records. A bbox
    lying fully outside its image raises DataError naming the record.
    """
    root = Path(image_root)
    cache: dict[str, np.ndarray] = {}
    crops: list[PlantCrop] = []
    for rec in records:
        pixels = cache.get(rec.image)
        if pixels is None:
            pixels = load_image_rgb(root / rec.image)
            cache[rec.image] = pixels
        height, width = pixels.shape[:2]
        x0, y0, x1, y1 = clamp_bbox(rec.x, rec.y, rec.w, rec.h, width, height)
        if x1 <= x0 or y1 <= y0:
            raise DataError(f"record {rec.crop_id!r}: bbox ({rec.x},{rec.y},{rec.w},{rec.h}) lies outside {width}x{height} image {rec.image!r}")
        crops.append(PlantCrop(pixels=pixels[y0:y1, x0:x1].copy(), origin=rec))
    return crops


def split_dataset(samples: list[LabeledSample], test_fraction: float, seed: int) -> DatasetSplit:
    """Seeded shuffle split. |test| = round(test_fraction * n), kept in [1, n-1]."""
    n = len(samples)
    if n < 2:
        raise DataError(f"need at least 2 samples to split, got {n}")
    if not (0.0 < test_fraction < 1.0):
        raise DataError(f"test_fraction must lie strictly between 0 and 1, got {test_fraction}")
    n_test = min(max(int(round(test_fraction * n)), 1), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    return DatasetSplit(train_indices=np.sort(order[n_test:]), test_indices=np.sort(order[:n_test]), seed=seed)


def dataset_stats(samples: list[LabeledSample]) -> DatasetStats:
    """Descriptive statistics of the LAI labels; std is population (divisor n)."""
    if not samples:
        raise DataError("cannot compute statistics of an empty dataset")
    labels = np.array([s.lai for s in samples], dtype=np.float64)
    return DatasetStats(
        count=labels.size,
        mean=float(labels.mean()),
        std_dev=float(labels.std()),
        min=float(labels.min()),
        max=float(labels.max()),
    )
