"""Synthetic benchmark: crops with a green rectangle of known area fraction on
a brown background, labeled LAI = 3 * fraction + Gaussian noise (sigma 0.05).

Colors are chosen so the default pipeline classifies every rectangle pixel as
green and every background pixel as not: the rectangle's red/blue channels
stay at or below the binary cutoff, its green channel always saturates, and
the background turns yellow (hue 60) or achromatic after saturation. The
green-ratio feature therefore equals the rectangle fraction exactly.

Denser canopies also read differently in the other features, as real ones do:
the rectangle never touches the border (its full perimeter stays visible to
the edge detector) and its red/blue floor rises with the area fraction, so
edge density grows and green saturation falls monotonically with LAI.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image

from .dataset import AnnotationRecord, PlantCrop
from .errors import DataError

LAI_SLOPE = 3.0
LAI_NOISE_SIGMA = 0.05
LAI_FLOOR = 0.05


def synthetic_crop(rng: np.random.Generator, size: int = 64) -> tuple[np.ndarray, float]:
    """One crop and the exact green-area fraction it realizes."""
    if size < 8:
        raise DataError(f"crop size must be >= 8, got {size}")
    fraction = rng.uniform(0.05, 0.95)
    aspect = rng.uniform(0.6, 1.6)
    area = fraction * size * size
    margin = 1
    w = int(np.clip(round(np.sqrt(area * aspect)), 1, size - 2 * margin))
    h = int(np.clip(round(area / w), 1, size - 2 * margin))
    x0 = int(rng.integers(margin, size - w - margin + 1))
    y0 = int(rng.integers(margin, size - h - margin + 1))
    realized = (w * h) / (size * size)

    base_brown = np.array([120, 85, 40])
    pixels = base_brown + rng.integers(-15, 16, size=(size, size, 3))
    # red/blue floor rises with coverage (deeper green), capped under the
    # binary cutoff so these channels never saturate out of the hue window
    rb = 15.0 + 25.0 * realized
    rect = np.empty((h, w, 3), dtype=np.float64)
    rect[..., 0] = rb + rng.integers(-8, 9, size=(h, w))
    rect[..., 1] = 165 + rng.integers(-15, 16, size=(h, w))
    rect[..., 2] = rb + rng.integers(-8, 9, size=(h, w))
    pixels[y0:y0 + h, x0:x0 + w] = rect.round()
    return np.clip(pixels, 0, 255).astype(np.uint8), realized


def build_benchmark(n: int = 500, size: int = 64, seed: int = 42) -> list[PlantCrop]:
    """In-memory benchmark crops; labels live on each crop's origin record."""
    if n < 2:
        raise DataError(f"benchmark needs at least 2 crops, got {n}")
    rng = np.random.default_rng(seed)
    crops = []
    for i in range(n):
        pixels, fraction = synthetic_crop(rng, size)
        lai = max(LAI_SLOPE * fraction + rng.normal(0.0, LAI_NOISE_SIGMA), LAI_FLOOR)
        image = f"crop_{i:04d}.png"
        record = AnnotationRecord(image=image, x=0, y=0, w=size, h=size, lai=float(lai),
                                  crop_id=f"{Path(image).stem}_{i:04d}")
        crops.append(PlantCrop(pixels=pixels, origin=record))
    return crops


def write_benchmark(out_dir: str | Path, n: int = 500, size: int = 64, seed: int = 42) -> Path:
    """Write benchmark images plus annotations.csv; returns the csv path."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    crops = build_benchmark(n, size, seed)
    annotations = root / "annotations.csv"
    with open(annotations, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "x", "y", "w", "h", "lai"])
        for crop in crops:
            Image.fromarray(crop.pixels).save(root / crop.origin.image)
            rec = crop.origin
            writer.writerow([rec.image, rec.x, rec.y, rec.w, rec.h, repr(rec.lai)])
    return annotations
