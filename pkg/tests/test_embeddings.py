import numpy as np
import pytest

from canopylai import (AnnotationRecord, DataError, EmbedConfig, EmbeddingStore,
                       load_embeddings, resize_bilinear, run_embedding_model, write_embeddings)
from canopylai.embeddings import embeddings_to_samples, preprocess_crop
from conftest import make_crop, random_crop


def naive_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Half-pixel-center bilinear, one pixel at a time."""
    in_h, in_w = img.shape[:2]
    out = np.zeros((out_h, out_w) + img.shape[2:], dtype=np.float64)
    for i in range(out_h):
        for j in range(out_w):
            sy = (i + 0.5) * in_h / out_h - 0.5
            sx = (j + 0.5) * in_w / out_w - 0.5
            y0 = int(np.floor(sy))
            x0 = int(np.floor(sx))
            fy, fx = sy - y0, sx - x0
            y0c, y1c = np.clip([y0, y0 + 1], 0, in_h - 1)
            x0c, x1c = np.clip([x0, x0 + 1], 0, in_w - 1)
            top = img[y0c, x0c] * (1 - fx) + img[y0c, x1c] * fx
            bot = img[y1c, x0c] * (1 - fx) + img[y1c, x1c] * fx
            out[i, j] = top * (1 - fy) + bot * fy
    return out


def test_resize_bilinear_identity():
    rng = np.random.default_rng(30)
    img = rng.random((7, 9, 3))
    assert np.array_equal(resize_bilinear(img, 7, 9), img)


def test_resize_bilinear_matches_pointwise_oracle():
    rng = np.random.default_rng(31)
    for shape, out_hw in (((6, 8, 3), (11, 5)), ((5, 5, 1), (10, 10)), ((12, 7, 3), (4, 9))):
        img = rng.random(shape)
        got = resize_bilinear(img, *out_hw)
        assert np.allclose(got, naive_resize(img, *out_hw), atol=1e-12)


def test_resize_bilinear_constant_preserved():
    img = np.full((5, 5, 3), 0.37)
    out = resize_bilinear(img, 13, 3)
    assert np.allclose(out, 0.37, atol=1e-12)


def test_preprocess_crop_normalization():
    config = EmbedConfig()
    pixels = np.full((10, 10, 3), 128, dtype=np.uint8)
    out = preprocess_crop(pixels, 8, 8, config)
    assert out.shape == (3, 8, 8)
    assert out.dtype == np.float32
    for c in range(3):
        want = (128 / 255.0 - config.mean[c]) / config.std[c]
        assert np.allclose(out[c], np.float32(want), atol=1e-6)


def make_store(rng, n=4, d=16):
    entries = {f"crop_{i:04d}": rng.normal(0, 1, d).astype(np.float32) for i in range(n)}
    return EmbeddingStore(dimension=d, entries=entries, source="file")


def test_binary_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(32)
    store = make_store(rng)
    path = tmp_path / "e.emb"
    write_embeddings(store, path)
    loaded = load_embeddings(path)
    assert loaded.dimension == store.dimension
    assert list(loaded.entries) == list(store.entries)
    for key, vec in store.entries.items():
        assert np.array_equal(loaded.entries[key], vec)


def test_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(33)
    store = make_store(rng, n=3, d=5)
    path = tmp_path / "e.csv"
    write_embeddings(store, path)
    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[0].startswith("crop_id,")
    loaded = load_embeddings(path)
    for key, vec in store.entries.items():
        assert np.allclose(loaded.entries[key], vec, atol=1e-6)


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "e.emb"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(DataError):
        load_embeddings(path)


def test_load_rejects_truncation(tmp_path):
    rng = np.random.default_rng(34)
    store = make_store(rng)
    path = tmp_path / "e.emb"
    write_embeddings(store, path)
    blob = path.read_bytes()
    for cut in (len(blob) - 3, len(blob) // 2, 6):
        bad = tmp_path / "cut.emb"
        bad.write_bytes(blob[:cut])
        with pytest.raises(DataError):
            load_embeddings(bad)


def test_load_rejects_trailing_bytes(tmp_path):
    rng = np.random.default_rng(35)
    store = make_store(rng)
    path = tmp_path / "e.emb"
    write_embeddings(store, path)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(DataError):
        load_embeddings(path)


def test_run_embedding_model_shapes_and_determinism(tiny_model_file):
    model_path, _ = tiny_model_file
    rng = np.random.default_rng(36)
    crops = [random_crop(rng, 20 + i, 24, crop_id=f"crop_{i:04d}") for i in range(5)]
    store = run_embedding_model(crops, model_path)
    assert store.dimension == 8
    assert len(store) == 5
    assert list(store.entries) == [c.crop_id for c in crops]
    again = run_embedding_model(crops, model_path)
    for key in store.entries:
        assert np.array_equal(store.entries[key], again.entries[key])


def test_run_embedding_model_matches_single_crop(tiny_model_file):
    # batch processing must not change any individual embedding
    model_path, _ = tiny_model_file
    rng = np.random.default_rng(37)
    crops = [random_crop(rng, 16, 16, crop_id=f"crop_{i:04d}") for i in range(11)]
    batched = run_embedding_model(crops, model_path, EmbedConfig(batch_size=4))
    for crop in crops:
        alone = run_embedding_model([crop], model_path)
        assert np.allclose(alone.entries[crop.crop_id], batched.entries[crop.crop_id],
                           atol=1e-5)


def test_run_embedding_model_rejects_duplicate_ids(tiny_model_file):
    model_path, _ = tiny_model_file
    rng = np.random.default_rng(38)
    crops = [random_crop(rng, 16, 16, crop_id="same"), random_crop(rng, 16, 16, crop_id="same")]
    with pytest.raises(DataError):
        run_embedding_model(crops, model_path)


def test_embeddings_to_samples_order_and_missing():
    rng = np.random.default_rng(39)
    store = make_store(rng, n=3, d=4)
    records = [AnnotationRecord(image="img.png", x=0, y=0, w=2, h=2, lai=1.0 + i,
                                crop_id=f"crop_{i:04d}") for i in (2, 0, 1)]
    samples = embeddings_to_samples(store, records)
    assert [s.crop_id for s in samples] == ["crop_0002", "crop_0000", "crop_0001"]
    assert samples[0].lai == 1.0 + 2
    assert np.allclose(samples[0].features, store.entries["crop_0002"].astype(np.float64))

    missing = [AnnotationRecord(image="img.png", x=0, y=0, w=2, h=2, lai=1.0, crop_id="ghost")]
    with pytest.raises(DataError, match="ghost"):
        embeddings_to_samples(store, missing)
