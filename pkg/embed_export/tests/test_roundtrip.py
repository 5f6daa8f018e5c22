"""Round-trip contract with the consuming pipeline: embeddings computed
directly by the exporter must match the pipeline running the exported graph,
and the emitted file must load in the pipeline as-is.
"""

import struct

import numpy as np
import pytest

pytest.importorskip("embed_export")
canopylai = pytest.importorskip("canopylai")
from PIL import Image

import embed_export.export as export_mod
from embed_export import ExportError, export_embeddings, export_graph

TOLERANCE = 1e-4


@pytest.fixture(scope="module")
def exported_file(crop_dir, tmp_path_factory):
    out, _ = export_embeddings(crop_dir, tmp_path_factory.mktemp("rt") / "crops.emb",
                               seed=0)
    return out


def _crops_from_dir(directory):
    crops = []
    for path in sorted(directory.iterdir()):
        with Image.open(path) as img:
            pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
        record = canopylai.AnnotationRecord(image=path.name, x=0, y=0,
                                            w=pixels.shape[1], h=pixels.shape[0],
                                            lai=1.0, crop_id=path.stem)
        crops.append(canopylai.PlantCrop(pixels=pixels, origin=record))
    return crops


def test_round_trip_agrees_within_tolerance(exported_graph, exported_file, crop_dir):
    direct = canopylai.load_embeddings(exported_file)
    via_graph = canopylai.run_embedding_model(_crops_from_dir(crop_dir), exported_graph,
                                              canopylai.EmbedConfig())
    assert set(direct.entries) == set(via_graph.entries)
    assert len(direct.entries) == 5
    worst = max(float(np.max(np.abs(direct.entries[cid] - via_graph.entries[cid])))
                for cid in direct.entries)
    assert worst <= TOLERANCE
    print(f"PASS round trip: 5 crops, max |direct - via graph| = {worst:.3g} <= {TOLERANCE}")


def test_emitted_header_reports_2048_and_loads_in_pipeline(exported_file):
    blob = exported_file.read_bytes()
    assert blob[:4] == b"EMB1"
    dimension, count = struct.unpack_from("<II", blob, 4)
    assert dimension == 2048
    assert count == 5
    store = canopylai.load_embeddings(exported_file)
    assert store.dimension == 2048
    assert len(store.entries) == 5
    print("PASS embedding file: header D=2048, loads in the pipeline without error")


def test_failed_self_check_deletes_the_graph(tmp_path, monkeypatch):
    monkeypatch.setattr(export_mod, "_SELF_CHECK_TOLERANCE", 0.0)
    target = tmp_path / "rejected.onnx"
    with pytest.raises(ExportError, match="self-check diverged"):
        export_graph(target, seed=0)
    assert not target.exists()
