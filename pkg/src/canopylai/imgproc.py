"""From-scratch primitive image operations: grayscale, thresholding, HSV,
green masking, separable Gaussian blur, Sobel gradients and Canny edges.

Images are plain numpy arrays: RGB crops are (H, W, 3) uint8, gray images
(H, W) uint8, HSV images (H, W, 3) float64 with h in degrees [0, 360) and
s, v as fractions in [0, 1], masks (H, W) bool. Border policy everywhere is
edge replication so crop borders do not fabricate gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .errors import DataError

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)


@dataclass(frozen=True)
class EdgeParams:
    """Canny thresholds plus the blur applied upstream of edge detection."""

    low_threshold: float = 50.0
    high_threshold: float = 150.0
    blur_sigma: float = 1.4
    blur_kernel: int = 5

    def __post_init__(self):
        if not (0 < self.low_threshold < self.high_threshold):
            raise DataError(f"edge thresholds must satisfy 0 < low < high, got {self.low_threshold}, {self.high_threshold}")
        if self.blur_kernel < 3 or self.blur_kernel % 2 == 0:
            raise DataError(f"blur kernel must be an odd integer >= 3, got {self.blur_kernel}")
        if not (self.blur_sigma > 0):
            raise DataError(f"blur sigma must be > 0, got {self.blur_sigma}")


def to_gray(pixels: np.ndarray) -> np.ndarray:
    """Luma grayscale: round(0.299 R + 0.587 G + 0.114 B), uint8."""
    rgb = np.asarray(pixels, dtype=np.float64)
    gray = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8)


def threshold_binary(gray: np.ndarray, cutoff: int) -> np.ndarray:
    """Mask true exactly where pixel > cutoff (strictly above)."""
    return np.asarray(gray) > cutoff


def saturate_above(pixels: np.ndarray, cutoff: int) -> np.ndarray:
    """Set every channel value strictly above cutoff to 255, others unchanged."""
    px = np.asarray(pixels, dtype=np.uint8)
    return np.where(px > cutoff, np.uint8(255), px)


def rgb_to_hsv(pixels: np.ndarray) -> np.ndarray:
    """Hexcone RGB->HSV. h in degrees [0, 360), 0 for achromatic pixels."""
    rgb = np.asarray(pixels, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    h = np.zeros_like(v)
    chroma = np.where(c > 0, c, 1.0)
    rmax = (c > 0) & (v == r)
    gmax = (c > 0) & (v == g) & ~rmax
    bmax = (c > 0) & ~rmax & ~gmax
    # the red sextant wraps, hence the mod 6 on its signed offset
    h[rmax] = ((g - b)[rmax] / chroma[rmax]) % 6.0
    h[gmax] = (b - r)[gmax] / chroma[gmax] + 2.0
    h[bmax] = (r - g)[bmax] / chroma[bmax] + 4.0
    return np.stack([h * 60.0, s, v], axis=-1)


def green_mask(hsv: np.ndarray, hue_range: tuple[float, float] = (70.0, 170.0),
               min_s: float = 0.15, min_v: float = 0.10) -> np.ndarray:
    """Mask true where hue lies in [low, high] degrees and s, v clear their floors."""
    low, high = hue_range
    if not (low < high):
        raise DataError(f"hue_range must satisfy low < high, got {hue_range}")
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    return (h >= low) & (h <= high) & (s >= min_s) & (v >= min_v)


def gaussian_kernel(sigma: float, kernel: int) -> np.ndarray:
    """Normalized 1-D Gaussian sampled at integer offsets, length = kernel."""
    if kernel < 3 or kernel % 2 == 0:
        raise DataError(f"kernel must be an odd integer >= 3, got {kernel}")
    if not (sigma > 0):
        raise DataError(f"sigma must be > 0, got {sigma}")
    offsets = np.arange(kernel, dtype=np.float64) - kernel // 2
    w = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return w / w.sum()


def _convolve_rows(img: np.ndarray, w: np.ndarray) -> np.ndarray:
    r = w.size // 2
    padded = np.pad(img, ((0, 0), (r, r)), mode="edge")
    return sliding_window_view(padded, w.size, axis=1) @ w


def gaussian_blur(gray: np.ndarray, sigma: float, kernel: int) -> np.ndarray:
    """Separable Gaussian blur with edge-replicated borders, rounded to uint8."""
    w = gaussian_kernel(sigma, kernel)
    out = _convolve_rows(np.asarray(gray, dtype=np.float64), w)
    out = _convolve_rows(out.T, w).T
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def sobel_gradients(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel gradients (gx, gy) as float64, edge-replicated borders."""
    img = np.asarray(gray, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise DataError(f"gradient input must be a 2-D image at least 3x3, got shape {img.shape}")
    windows = sliding_window_view(np.pad(img, 1, mode="edge"), (3, 3))
    gx = np.tensordot(windows, SOBEL_X, axes=((2, 3), (0, 1)))
    gy = np.tensordot(windows, SOBEL_Y, axes=((2, 3), (0, 1)))
    return gx, gy


# NMS compares each pixel against its two neighbors along the gradient line.
# Rows grow downward, so 45 degrees (gx > 0, gy > 0) is the main diagonal.
_NMS_NEIGHBORS = (
    ((0, 1), (0, -1)),
    ((1, 1), (-1, -1)),
    ((1, 0), (-1, 0)),
    ((1, -1), (-1, 1)),
)


def canny_edges(gray: np.ndarray, params: EdgeParams) -> np.ndarray:
    """Four-stage Canny: Sobel, non-maximum suppression over 4 direction bins,
    double threshold, hysteresis keeping 8-connected components that touch a
    strong pixel. Expects any blurring to have been applied already.
    """
    gx, gy = sobel_gradients(gray)
    mag = np.hypot(gx, gy)
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    bins = np.floor((angle + 22.5) / 45.0).astype(np.intp) % 4

    height, width = mag.shape
    padded = np.pad(mag, 1, mode="constant")
    keep = np.zeros_like(mag, dtype=bool)
    for b, ((dy1, dx1), (dy2, dx2)) in enumerate(_NMS_NEIGHBORS):
        n1 = padded[1 + dy1:1 + dy1 + height, 1 + dx1:1 + dx1 + width]
        n2 = padded[1 + dy2:1 + dy2 + height, 1 + dx2:1 + dx2 + width]
        keep |= (bins == b) & (mag >= n1) & (mag >= n2)
    suppressed = np.where(keep, mag, 0.0)

    strong = suppressed >= params.high_threshold
    candidate = suppressed >= params.low_threshold
    if not strong.any():
        return np.zeros_like(strong)
    labels, count = ndimage.label(candidate, structure=np.ones((3, 3), dtype=bool))
    keep_label = np.zeros(count + 1, dtype=bool)
    keep_label[labels[strong]] = True
    keep_label[0] = False
    return keep_label[labels]
