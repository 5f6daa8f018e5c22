import numpy as np
import pytest

pytest.importorskip("embed_export")
pytest.importorskip("canopylai")


@pytest.fixture(scope="session")
def exported_graph(tmp_path_factory):
    """One validated graph export shared by the suite (the export itself
    runs the native-vs-exported self-check)."""
    from embed_export import export_graph
    path = tmp_path_factory.mktemp("graph") / "backbone.onnx"
    return export_graph(path, seed=0)


@pytest.fixture(scope="session")
def crop_dir(tmp_path_factory):
    """Five readable PNG crops of varying sizes."""
    from PIL import Image
    directory = tmp_path_factory.mktemp("crops")
    rng = np.random.default_rng(7)
    for i in range(5):
        pixels = rng.integers(0, 256, (48 + 8 * i, 40 + 6 * i, 3), dtype=np.uint8)
        Image.fromarray(pixels).save(directory / f"crop_{i:04d}.png")
    return directory
