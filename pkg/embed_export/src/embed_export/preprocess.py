"""Image-to-tensor preprocessing, matching the consuming pipeline's convention:
scale to [0, 1], bilinear resize with half-pixel centers and clamped source
coordinates, per-channel normalization, channels-first float32.
"""

from __future__ import annotations

import numpy as np

from .backbone import CHANNEL_MEAN, CHANNEL_STD, INPUT_SIZE
from .errors import ExportError


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
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


def preprocess_image(pixels: np.ndarray, size: int = INPUT_SIZE) -> np.ndarray:
    """(H, W, 3) uint8 -> normalized (3, size, size) float32."""
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ExportError(f"expected a non-empty (H, W, 3) image, got shape {arr.shape}")
    x = arr.astype(np.float64) / 255.0
    x = resize_bilinear(x, size, size)
    x = (x - np.asarray(CHANNEL_MEAN)) / np.asarray(CHANNEL_STD)
    return x.transpose(2, 0, 1).astype(np.float32)
