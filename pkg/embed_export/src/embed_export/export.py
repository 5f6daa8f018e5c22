"""The two export operations: a serialized inference graph, or a precomputed
embedding file for a directory of crop images. Both artifacts are consumed
by the canopylai pipeline; the graph export self-checks against it.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .backbone import FEATURE_DIM, INPUT_SIZE, build_backbone, run_native
from .emb_io import ExportManifest, default_manifest, write_embedding_file, write_manifest
from .errors import ExportError
from .graph_writer import graph_bytes
from .preprocess import preprocess_image

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
_SELF_CHECK_TOLERANCE = 1e-4


def _consumer():
    """The pipeline package that executes exported graphs; needed for the
    mandatory post-export self-check."""
    try:
        import canopylai
    except ImportError as exc:
        raise ExportError(
            "graph self-check needs the canopylai package installed "
            "to execute the exported file") from exc
    return canopylai


def _self_check(model: torch.nn.Module, graph_file: Path, batch: int = 2) -> float:
    """Run a random batch natively and through the exported file; return the
    largest elementwise difference."""
    lai = _consumer()
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, (batch, INPUT_SIZE, INPUT_SIZE, 3), dtype=np.uint8)
    native = run_native(
        model, torch.from_numpy(np.stack([preprocess_image(p) for p in pixels]))).numpy()

    crops = [lai.PlantCrop(
        pixels=pixels[i],
        origin=lai.AnnotationRecord(image=f"check_{i}.png", x=0, y=0,
                                    w=INPUT_SIZE, h=INPUT_SIZE, lai=1.0,
                                    crop_id=f"check_{i}"))
        for i in range(batch)]
    store = lai.run_embedding_model(crops, graph_file, lai.EmbedConfig())
    exported = np.stack([store.entries[f"check_{i}"] for i in range(batch)])
    return float(np.max(np.abs(native - exported)))


def export_graph(out_file: str | Path, checkpoint: str | Path | None = None,
                 seed: int = 0) -> Path:
    """Serialize the backbone to out_file and validate it by comparing native
    and exported outputs on a random batch; on divergence beyond 1e-4 the
    file is deleted and the export fails. Writes a manifest alongside.
    """
    out_path = Path(out_file)
    model = build_backbone(checkpoint, seed)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_bytes(graph_bytes(model))
    try:
        divergence = _self_check(model, out_path)
    except Exception:
        out_path.unlink(missing_ok=True)
        raise
    if divergence > _SELF_CHECK_TOLERANCE:
        out_path.unlink(missing_ok=True)
        raise ExportError(f"graph self-check diverged: max |native - exported| = "
                          f"{divergence:.3g} > {_SELF_CHECK_TOLERANCE}")
    write_manifest(default_manifest(), out_path)
    return out_path


def _load_rgb(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def export_embeddings(crop_dir: str | Path, out_file: str | Path,
                      checkpoint: str | Path | None = None, seed: int = 0,
                      batch_size: int = 8) -> tuple[Path, ExportManifest]:
    """Embed every readable image in crop_dir (crop id = file stem) into an
    EMB1 file with D=2048. Unreadable images are skipped with a warning and
    listed in the manifest; zero successes is an error.
    """
    directory = Path(crop_dir)
    if not directory.is_dir():
        raise ExportError(f"crop directory not found: {directory}")
    if batch_size < 1:
        raise ExportError(f"batch_size must be >= 1, got {batch_size}")
    files = sorted(p for p in directory.iterdir()
                   if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES)
    if not files:
        raise ExportError(f"no image files in {directory}")

    images: list[tuple[str, np.ndarray]] = []
    skipped: list[str] = []
    for path in files:
        try:
            pixels = _load_rgb(path)
        except (OSError, UnidentifiedImageError, ValueError) as exc:
            print(f"warning: skipping unreadable image {path.name}: {exc}", file=sys.stderr)
            skipped.append(path.name)
            continue
        images.append((path.stem, pixels))
    if not images:
        raise ExportError(f"none of the {len(files)} images in {directory} could be read")
    ids = [crop_id for crop_id, _ in images]
    if len(set(ids)) != len(ids):
        duplicate = next(i for i in ids if ids.count(i) > 1)
        raise ExportError(f"duplicate crop id {duplicate!r} (same stem, different extension)")

    model = build_backbone(checkpoint, seed)
    entries: dict[str, np.ndarray] = {}
    for start in range(0, len(images), batch_size):
        chunk = images[start:start + batch_size]
        batch = torch.from_numpy(np.stack([preprocess_image(p) for _, p in chunk]))
        vectors = run_native(model, batch).numpy().astype(np.float32)
        for (crop_id, _), vec in zip(chunk, vectors):
            entries[crop_id] = vec

    out_path = Path(out_file)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_embedding_file(entries, out_path)
    manifest = default_manifest(count=len(entries), skipped=tuple(skipped))
    write_manifest(manifest, out_path)
    return out_path, manifest
