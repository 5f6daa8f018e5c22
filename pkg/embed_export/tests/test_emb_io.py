import json
import struct

import numpy as np
import pytest

pytest.importorskip("embed_export")
from embed_export import (ExportError, ExportManifest, manifest_path, write_embedding_file,
                          write_manifest)


def test_binary_layout_parsed_by_hand(tmp_path):
    rng = np.random.default_rng(31)
    entries = {f"crop_{i}": rng.normal(0, 1, 4).astype(np.float32) for i in range(3)}
    file = tmp_path / "e.emb"
    write_embedding_file(entries, file)

    blob = file.read_bytes()
    assert blob[:4] == b"EMB1"
    dimension, count = struct.unpack_from("<II", blob, 4)
    assert (dimension, count) == (4, 3)
    offset = 12
    for crop_id, vec in entries.items():
        (id_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        assert blob[offset:offset + id_len].decode("utf-8") == crop_id
        offset += id_len
        values = np.frombuffer(blob, dtype="<f4", count=4, offset=offset)
        assert np.array_equal(values, vec)
        offset += 16
    assert offset == len(blob)


def test_primary_pipeline_reads_the_file(tmp_path):
    lai = pytest.importorskip("canopylai")
    rng = np.random.default_rng(32)
    entries = {f"c{i}": rng.normal(0, 1, 6).astype(np.float32) for i in range(4)}
    file = tmp_path / "interop.emb"
    write_embedding_file(entries, file)
    store = lai.load_embeddings(file)
    assert store.dimension == 6
    assert set(store.entries) == set(entries)
    for crop_id in entries:
        assert np.array_equal(store.entries[crop_id], entries[crop_id])


def test_writer_rejects_bad_inputs(tmp_path):
    with pytest.raises(ExportError, match="zero records"):
        write_embedding_file({}, tmp_path / "x.emb")
    ragged = {"a": np.zeros(3, dtype=np.float32), "b": np.zeros(4, dtype=np.float32)}
    with pytest.raises(ExportError, match="disagree"):
        write_embedding_file(ragged, tmp_path / "y.emb")


def test_manifest_contents(tmp_path):
    artifact = tmp_path / "crops.emb"
    artifact.write_bytes(b"placeholder")
    manifest = ExportManifest(model_family="resnet50", dimension=2048,
                              count=4, skipped=("bad.png",))
    path = write_manifest(manifest, artifact)
    assert path == manifest_path(artifact) == tmp_path / "crops.emb.manifest.json"
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["model_family"] == "resnet50"
    assert data["dimension"] == 2048
    assert data["count"] == 4
    assert data["skipped"] == ["bad.png"]
    assert data["exported"]  # ISO timestamp filled at write time

    # preprocessing constants must agree with the consuming pipeline's defaults
    lai = pytest.importorskip("canopylai")
    defaults = lai.EmbedConfig()
    assert tuple(data["mean"]) == defaults.mean
    assert tuple(data["std"]) == defaults.std
