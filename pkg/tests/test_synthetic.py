import numpy as np
import pytest

from canopylai import (DataError, build_benchmark, extract_crops, extract_green_features,
                       green_mask, parse_annotations, rgb_to_hsv, saturate_above,
                       synthetic_crop, write_benchmark)
from canopylai.synthetic import LAI_FLOOR, LAI_NOISE_SIGMA, LAI_SLOPE
from conftest import make_crop


def test_generator_is_deterministic():
    a = build_benchmark(n=10, size=32, seed=9)
    b = build_benchmark(n=10, size=32, seed=9)
    for crop_a, crop_b in zip(a, b):
        assert np.array_equal(crop_a.pixels, crop_b.pixels)
        assert crop_a.origin.lai == crop_b.origin.lai
    c = build_benchmark(n=10, size=32, seed=10)
    assert any(not np.array_equal(x.pixels, y.pixels) for x, y in zip(a, c))


def test_green_ratio_equals_realized_fraction():
    # the mask must classify every rectangle pixel green, all background not
    rng = np.random.default_rng(100)
    for _ in range(25):
        pixels, fraction = synthetic_crop(rng, size=48)
        crop_feats = extract_green_features(make_crop(pixels))
        assert crop_feats.green_ratio == pytest.approx(fraction, abs=1e-12)


def test_labels_follow_the_linear_law():
    crops = build_benchmark(n=300, size=32, seed=12)
    fractions = []
    labels = []
    for crop in crops:
        feats = extract_green_features(crop)
        fractions.append(feats.green_ratio)
        labels.append(crop.origin.lai)
    fractions = np.array(fractions)
    labels = np.array(labels)
    noise = labels - LAI_SLOPE * fractions
    assert np.all(labels >= LAI_FLOOR)
    # apart from floor clipping, noise is centred and about sigma-sized
    free = labels > LAI_FLOOR
    assert abs(noise[free].mean()) < 5 * LAI_NOISE_SIGMA / np.sqrt(free.sum())
    assert np.all(np.abs(noise[free]) < 6 * LAI_NOISE_SIGMA)


def test_rectangle_keeps_margin():
    rng = np.random.default_rng(101)
    for _ in range(25):
        pixels, _ = synthetic_crop(rng, size=40)
        feats = extract_green_features(make_crop(pixels))
        assert feats.green_ratio > 0.0
        mask = green_mask(rgb_to_hsv(saturate_above(pixels, 50)))
        assert not mask[0].any() and not mask[-1].any()
        assert not mask[:, 0].any() and not mask[:, -1].any()


def test_write_benchmark_roundtrip(tmp_path):
    annotations = write_benchmark(tmp_path, n=6, size=24, seed=13)
    records = parse_annotations(annotations)
    assert len(records) == 6
    crops = extract_crops(records, tmp_path)
    reference = build_benchmark(n=6, size=24, seed=13)
    for crop, ref in zip(crops, reference):
        assert np.array_equal(crop.pixels, ref.pixels)  # png round-trip exact
        assert crop.origin.lai == ref.origin.lai  # repr round-trips the label


def test_build_benchmark_validation():
    with pytest.raises(DataError):
        build_benchmark(n=1)
    with pytest.raises(DataError):
        synthetic_crop(np.random.default_rng(0), size=4)
