import numpy as np
import pytest

from canopylai import AnnotationRecord, LabeledSample, PlantCrop


def make_crop(pixels: np.ndarray, crop_id: str = "img_0000", lai: float = 1.0) -> PlantCrop:
    """Wrap a pixel array in a PlantCrop with a minimal origin record."""
    record = AnnotationRecord(image="img.png", x=0, y=0, w=pixels.shape[1],
                              h=pixels.shape[0], lai=lai, crop_id=crop_id)
    return PlantCrop(pixels=np.ascontiguousarray(pixels, dtype=np.uint8), origin=record)


def random_crop(rng: np.random.Generator, height: int = 32, width: int = 32,
                crop_id: str = "img_0000") -> PlantCrop:
    return make_crop(rng.integers(0, 256, (height, width, 3), dtype=np.uint8), crop_id)


def linear_samples(rng: np.random.Generator, n: int, d: int,
                   noise: float = 0.0) -> tuple[list[LabeledSample], np.ndarray, float]:
    """Random features with a known affine target; returns (samples, coefs, intercept)."""
    X = rng.normal(0.0, 2.0, (n, d))
    coefs = rng.normal(0.0, 1.0, d)
    intercept = float(rng.normal(0.0, 1.0))
    y = X @ coefs + intercept + noise * rng.normal(0.0, 1.0, n)
    samples = [LabeledSample(crop_id=f"s_{i:04d}", features=X[i], lai=float(y[i]))
               for i in range(n)]
    return samples, coefs, intercept


@pytest.fixture(scope="session")
def tiny_model_file(tmp_path_factory):
    """A small serialized conv net on disk, shared across tests."""
    from onnx_builder import tiny_convnet
    blob, params = tiny_convnet(seed=0, side=16, depth=8)
    path = tmp_path_factory.mktemp("graph") / "tiny.onnx"
    path.write_bytes(blob)
    return path, params
