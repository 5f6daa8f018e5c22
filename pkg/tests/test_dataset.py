import numpy as np
import pytest
from PIL import Image

from canopylai import (AnnotationRecord, DataError, LabeledSample, PlantCrop, dataset_stats,
                       extract_crops, load_image_rgb, parse_annotations, split_dataset)
from canopylai.dataset import clamp_bbox

HEADER = "image,x,y,w,h,lai\n"


def write_csv(path, rows):
    path.write_text(HEADER + "".join(rows), encoding="utf-8")
    return path


def test_parse_annotations_basic(tmp_path):
    path = write_csv(tmp_path / "a.csv", ["field1.png,10,20,30,40,2.5\n",
                                          "field2.png,0,0,64,64,1.0\n"])
    records = parse_annotations(path)
    assert len(records) == 2
    first = records[0]
    assert (first.image, first.x, first.y, first.w, first.h) == ("field1.png", 10, 20, 30, 40)
    assert first.lai == 2.5
    assert first.crop_id == "field1_0000"
    assert records[1].crop_id == "field2_0001"


def test_parse_annotations_rejects_bad_header(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("image,x,y,width,height,lai\nimg.png,0,0,2,2,1.0\n", encoding="utf-8")
    with pytest.raises(DataError):
        parse_annotations(path)


def test_parse_annotations_reports_line_numbers(tmp_path):
    path = write_csv(tmp_path / "a.csv", ["img.png,0,0,8,8,1.0\n", "img.png,0,0,8,8,oops\n"])
    with pytest.raises(DataError, match="line 3"):
        parse_annotations(path)


def test_parse_annotations_rejects_fractional_pixels(tmp_path):
    path = write_csv(tmp_path / "a.csv", ["img.png,1.5,0,8,8,1.0\n"])
    with pytest.raises(DataError):
        parse_annotations(path)


def test_parse_annotations_rejects_bad_boxes_and_labels(tmp_path):
    with pytest.raises(DataError):
        parse_annotations(write_csv(tmp_path / "w0.csv", ["img.png,0,0,0,8,1.0\n"]))
    with pytest.raises(DataError):
        parse_annotations(write_csv(tmp_path / "neg.csv", ["img.png,0,0,8,8,-2.0\n"]))
    with pytest.raises(DataError):
        parse_annotations(write_csv(tmp_path / "zero.csv", ["img.png,0,0,8,8,0\n"]))


def test_parse_annotations_rejects_empty(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text(HEADER, encoding="utf-8")
    with pytest.raises(DataError):
        parse_annotations(path)


def test_record_validation():
    with pytest.raises(DataError):
        AnnotationRecord(image="i.png", x=0, y=0, w=-1, h=5, lai=1.0, crop_id="c")
    with pytest.raises(DataError):
        AnnotationRecord(image="i.png", x=0, y=0, w=5, h=5, lai=float("nan"), crop_id="c")


def test_clamp_bbox():
    assert clamp_bbox(10, 10, 5, 5, 64, 64) == (10, 10, 15, 15)
    assert clamp_bbox(-3, -3, 10, 10, 64, 64) == (0, 0, 7, 7)
    assert clamp_bbox(60, 60, 10, 10, 64, 64) == (60, 60, 64, 64)
    x0, y0, x1, y1 = clamp_bbox(100, 0, 5, 5, 64, 64)
    assert x1 <= x0  # fully outside collapses to an empty box


def test_extract_crops_exact_pixels(tmp_path):
    rng = np.random.default_rng(20)
    pixels = rng.integers(0, 256, (40, 50, 3), dtype=np.uint8)
    Image.fromarray(pixels).save(tmp_path / "img.png")
    path = write_csv(tmp_path / "a.csv", ["img.png,5,7,10,12,1.5\n",
                                          "img.png,-4,30,20,20,2.0\n"])
    crops = extract_crops(parse_annotations(path), tmp_path)
    assert np.array_equal(crops[0].pixels, pixels[7:19, 5:15])
    assert crops[0].origin.lai == 1.5
    # second bbox clamps to the image: x [-4,16) -> [0,16), y [30,50) -> [30,40)
    assert np.array_equal(crops[1].pixels, pixels[30:40, 0:16])
    assert crops[1].width == 16 and crops[1].height == 10


def test_extract_crops_rejects_outside_bbox(tmp_path):
    pixels = np.zeros((10, 10, 3), dtype=np.uint8)
    Image.fromarray(pixels).save(tmp_path / "img.png")
    path = write_csv(tmp_path / "a.csv", ["img.png,50,50,5,5,1.0\n"])
    with pytest.raises(DataError):
        extract_crops(parse_annotations(path), tmp_path)


def test_extract_crops_missing_image(tmp_path):
    path = write_csv(tmp_path / "a.csv", ["gone.png,0,0,5,5,1.0\n"])
    with pytest.raises(DataError):
        extract_crops(parse_annotations(path), tmp_path)


def test_load_image_rgb_roundtrip(tmp_path):
    rng = np.random.default_rng(21)
    pixels = rng.integers(0, 256, (8, 9, 3), dtype=np.uint8)
    Image.fromarray(pixels).save(tmp_path / "img.png")
    assert np.array_equal(load_image_rgb(tmp_path / "img.png"), pixels)


def test_plant_crop_validation():
    record = AnnotationRecord(image="i.png", x=0, y=0, w=4, h=4, lai=1.0, crop_id="c")
    with pytest.raises(DataError):
        PlantCrop(pixels=np.zeros((4, 4), dtype=np.uint8), origin=record)
    with pytest.raises(DataError):
        PlantCrop(pixels=np.zeros((0, 4, 3), dtype=np.uint8), origin=record)


def make_samples(n):
    return [LabeledSample(crop_id=f"c{i}", features=np.array([float(i)]), lai=1.0 + i)
            for i in range(n)]


def test_split_dataset_reproducible_and_disjoint():
    samples = make_samples(50)
    split1 = split_dataset(samples, 0.2, seed=42)
    split2 = split_dataset(samples, 0.2, seed=42)
    assert np.array_equal(split1.train_indices, split2.train_indices)
    assert np.array_equal(split1.test_indices, split2.test_indices)
    assert len(split1.test_indices) == 10
    merged = np.concatenate([split1.train_indices, split1.test_indices])
    assert sorted(merged.tolist()) == list(range(50))
    different = split_dataset(samples, 0.2, seed=7)
    assert not np.array_equal(split1.test_indices, different.test_indices)


def test_split_dataset_bounds():
    samples = make_samples(5)
    # tiny fraction still leaves one test row; huge fraction leaves one train row
    assert len(split_dataset(samples, 0.01, seed=0).test_indices) == 1
    assert len(split_dataset(samples, 0.99, seed=0).train_indices) == 1
    with pytest.raises(DataError):
        split_dataset(samples, 0.0, seed=0)
    with pytest.raises(DataError):
        split_dataset(samples, 1.0, seed=0)
    with pytest.raises(DataError):
        split_dataset(make_samples(1), 0.5, seed=0)


def test_dataset_stats_population_std():
    samples = [LabeledSample(crop_id=str(i), features=np.zeros(2), lai=v)
               for i, v in enumerate([1.0, 2.0, 3.0, 4.0])]
    stats = dataset_stats(samples)
    assert stats.count == 4
    assert stats.mean == 2.5
    assert stats.std_dev == pytest.approx(np.sqrt(1.25), abs=1e-15)
    assert stats.min == 1.0 and stats.max == 4.0


def test_labeled_sample_validation():
    with pytest.raises(DataError):
        LabeledSample(crop_id="c", features=np.array([[1.0]]), lai=1.0)
    with pytest.raises(DataError):
        LabeledSample(crop_id="c", features=np.array([np.nan]), lai=1.0)
