"""Handcrafted feature vocabulary: HSV color histogram, Hu invariant moments,
and GLCM texture statistics (contrast, energy, homogeneity), concatenated
into one 522-long vector per crop.

Layout (frozen): 512 histogram bins in C order over (h, s, v), then the 7
log-scaled Hu moments, then contrast, energy, homogeneity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import PlantCrop
from .errors import DataError
from .imgproc import rgb_to_hsv, to_gray

HISTOGRAM_BINS = 8
GLCM_LEVELS = 32
GLCM_OFFSET = (1, 0)
VOCAB_DIM = HISTOGRAM_BINS**3 + 7 + 3
HU_LOG_EPS = 1e-30


@dataclass(frozen=True)
class GlcmMatrix:
    """Symmetric, normalized gray-level co-occurrence matrix."""

    levels: int
    matrix: np.ndarray  # (levels, levels) float64
    offset: tuple[int, int]
    symmetric: bool = True
    normalized: bool = True


@dataclass(frozen=True)
class HaralickStats:
    contrast: float
    energy: float
    homogeneity: float


def color_histogram(hsv: np.ndarray, bins_per_channel: int = HISTOGRAM_BINS) -> np.ndarray:
    """Normalized 3-D histogram over (h/360, s, v), equal-width bins per channel.

    Each channel is mapped to [0, 1) and floored into a bin; the top edge
    (s or v exactly 1) is clamped into the last bin. Bins sum to 1.
    """
    if bins_per_channel < 2:
        raise DataError(f"bins_per_channel must be >= 2, got {bins_per_channel}")
    hsv = np.asarray(hsv, dtype=np.float64)
    if hsv.ndim != 3 or hsv.shape[2] != 3 or hsv.shape[0] == 0 or hsv.shape[1] == 0:
        raise DataError("color_histogram needs a non-empty (H, W, 3) HSV image")
    unit = hsv.reshape(-1, 3) / np.array([360.0, 1.0, 1.0])
    idx = np.minimum((unit * bins_per_channel).astype(np.intp), bins_per_channel - 1)
    flat = np.bincount(
        (idx[:, 0] * bins_per_channel + idx[:, 1]) * bins_per_channel + idx[:, 2],
        minlength=bins_per_channel**3,
    )
    return flat.reshape((bins_per_channel,) * 3).astype(np.float64) / unit.shape[0]


def hu_moments(gray: np.ndarray) -> np.ndarray:
    """The 7 Hu invariants of the intensity raster, log-scaled.

    Raw moments over pixel intensities -> central moments (p+q <= 3) ->
    scale-normalized eta_pq -> Hu combinations h1..h7, each reported as
    -sign(h) * log10(|h| + 1e-30) to compress the enormous dynamic range.
    """
    img = np.asarray(gray, dtype=np.float64)
    if img.ndim != 2:
        raise DataError("hu_moments expects a 2-D grayscale image")
    m00 = img.sum()
    if m00 <= 0:
        raise DataError("hu_moments undefined for an all-zero image")
    ys, xs = np.mgrid[0:img.shape[0], 0:img.shape[1]]
    xbar = (xs * img).sum() / m00
    ybar = (ys * img).sum() / m00
    dx = xs - xbar
    dy = ys - ybar

    def mu(p: int, q: int) -> float:
        return float((dx**p * dy**q * img).sum())

    def eta(p: int, q: int) -> float:
        return mu(p, q) / m00 ** (1.0 + (p + q) / 2.0)

    n20, n02, n11 = eta(2, 0), eta(0, 2), eta(1, 1)
    n30, n03 = eta(3, 0), eta(0, 3)
    n21, n12 = eta(2, 1), eta(1, 2)

    a = n30 + n12
    b = n21 + n03
    c = n30 - 3 * n12
    d = 3 * n21 - n03
    hu = np.array([
        n20 + n02,
        (n20 - n02) ** 2 + 4 * n11**2,
        c**2 + d**2,
        a**2 + b**2,
        c * a * (a**2 - 3 * b**2) + d * b * (3 * a**2 - b**2),
        (n20 - n02) * (a**2 - b**2) + 4 * n11 * a * b,
        d * a * (a**2 - 3 * b**2) - c * b * (3 * a**2 - b**2),
    ])
    return -np.sign(hu) * np.log10(np.abs(hu) + HU_LOG_EPS)


def quantize_levels(gray: np.ndarray, levels: int) -> np.ndarray:
    """Equal-width quantization of 8-bit values into level indices 0..levels-1."""
    return (np.asarray(gray, dtype=np.intp) * levels) // 256


def glcm_compute(gray: np.ndarray, levels: int = GLCM_LEVELS,
                 offset: tuple[int, int] = GLCM_OFFSET) -> GlcmMatrix:
    """Co-occurrence counts of quantized gray pairs (p, p+offset), symmetrized
    (M + M^T) and normalized to sum 1. offset is (dx, dy) in (column, row).
    """
    if levels < 2:
        raise DataError(f"levels must be >= 2, got {levels}")
    img = np.asarray(gray)
    if img.ndim != 2:
        raise DataError("glcm_compute expects a 2-D grayscale image")
    dx, dy = offset
    height, width = img.shape
    y0, y1 = max(0, -dy), min(height, height - dy)
    x0, x1 = max(0, -dx), min(width, width - dx)
    if y1 <= y0 or x1 <= x0:
        raise DataError(f"image {width}x{height} has no pixel pairs at offset {offset}")
    q = quantize_levels(img, levels)
    a = q[y0:y1, x0:x1].ravel()
    b = q[y0 + dy:y1 + dy, x0 + dx:x1 + dx].ravel()
    counts = np.bincount(a * levels + b, minlength=levels * levels).reshape(levels, levels)
    sym = (counts + counts.T).astype(np.float64)
    return GlcmMatrix(levels=levels, matrix=sym / sym.sum(), offset=(dx, dy))


def haralick_stats(glcm: GlcmMatrix) -> HaralickStats:
    """Contrast, energy and homogeneity over quantized level indices i, j."""
    p = np.asarray(glcm.matrix, dtype=np.float64)
    if abs(p.sum() - 1.0) > 1e-9 or (p < 0).any():
        raise DataError("haralick_stats requires a normalized co-occurrence matrix")
    i = np.arange(glcm.levels, dtype=np.float64)
    sq_diff = (i[:, None] - i[None, :]) ** 2
    return HaralickStats(
        contrast=float((sq_diff * p).sum()),
        energy=float((p * p).sum()),
        homogeneity=float((p / (1.0 + sq_diff)).sum()),
    )


def vocab_feature_names() -> list[str]:
    """Column names matching vocab_features() output order."""
    names = [f"hist_{h}_{s}_{v}"
             for h in range(HISTOGRAM_BINS) for s in range(HISTOGRAM_BINS) for v in range(HISTOGRAM_BINS)]
    names += [f"hu_{k}" for k in range(1, 8)]
    names += ["contrast", "energy", "homogeneity"]
    return names


def vocab_features(crop: PlantCrop, bins_per_channel: int = HISTOGRAM_BINS,
                   glcm_levels: int = GLCM_LEVELS,
                   glcm_offset: tuple[int, int] = GLCM_OFFSET) -> np.ndarray:
    """Concatenated histogram | Hu | Haralick vector, length 522 at defaults."""
    hsv = rgb_to_hsv(crop.pixels)
    gray = to_gray(crop.pixels)
    hist = color_histogram(hsv, bins_per_channel).ravel()
    hu = hu_moments(gray)
    stats = haralick_stats(glcm_compute(gray, glcm_levels, glcm_offset))
    vec = np.concatenate([hist, hu, [stats.contrast, stats.energy, stats.homogeneity]])
    if not np.all(np.isfinite(vec)):
        raise DataError(f"crop {crop.crop_id!r}: non-finite vocabulary features")
    return vec
