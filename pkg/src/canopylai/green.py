"""Green-area edge feature extractor.

Pipeline per crop: saturate channel values above a cutoff to 255, convert to
HSV, mask green hues, Gaussian-blur the grayscale of the masked image, run
Canny, then aggregate six regressor-ready numbers. The vector layout is
frozen by green_feature_names().
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import PlantCrop
from .imgproc import EdgeParams, canny_edges, gaussian_blur, green_mask, rgb_to_hsv, saturate_above, to_gray

_FEATURE_NAMES = ("green_ratio", "edge_density", "green_edge_density", "mean_s_green", "mean_v_green", "crop_area")


@dataclass(frozen=True)
class GreenPipelineConfig:
    binary_cutoff: int = 50
    edge: EdgeParams = field(default_factory=EdgeParams)
    hue_range: tuple[float, float] = (70.0, 170.0)
    min_s: float = 0.15
    min_v: float = 0.10


@dataclass(frozen=True)
class GreenAreaFeatures:
    """Aggregates of the green mask and its edge map over one crop."""

    green_ratio: float
    edge_density: float
    green_edge_density: float
    mean_s_green: float
    mean_v_green: float
    crop_area: int

    def to_vector(self) -> np.ndarray:
        return np.array([self.green_ratio, self.edge_density, self.green_edge_density,
                         self.mean_s_green, self.mean_v_green, float(self.crop_area)], dtype=np.float64)


def green_feature_names() -> list[str]:
    """Vector layout of GreenAreaFeatures.to_vector(), frozen."""
    return list(_FEATURE_NAMES)


def extract_green_features(crop: PlantCrop, config: GreenPipelineConfig | None = None) -> GreenAreaFeatures:
    if config is None:
        config = GreenPipelineConfig()
    saturated = saturate_above(crop.pixels, config.binary_cutoff)
    hsv = rgb_to_hsv(saturated)
    mask = green_mask(hsv, config.hue_range, config.min_s, config.min_v)

    masked_gray = np.where(mask, to_gray(saturated), np.uint8(0))
    blurred = gaussian_blur(masked_gray, config.edge.blur_sigma, config.edge.blur_kernel)
    edges = canny_edges(blurred, config.edge)

    total = mask.size
    n_green = int(mask.sum())
    if n_green:
        mean_s = float(hsv[..., 1][mask].mean())
        mean_v = float(hsv[..., 2][mask].mean())
    else:
        mean_s = 0.0
        mean_v = 0.0
    return GreenAreaFeatures(
        green_ratio=n_green / total,
        edge_density=int(edges.sum()) / total,
        green_edge_density=int((edges & mask).sum()) / total,
        mean_s_green=mean_s,
        mean_v_green=mean_v,
        crop_area=total,
    )
