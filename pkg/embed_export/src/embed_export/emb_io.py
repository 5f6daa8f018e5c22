"""Writers for the interchange artifacts: the EMB1 embedding file and the
JSON manifest describing an export.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .backbone import CHANNEL_MEAN, CHANNEL_STD, FEATURE_DIM
from .errors import ExportError

_MAGIC = b"EMB1"


@dataclass(frozen=True)
class ExportManifest:
    model_family: str
    dimension: int
    mean: tuple[float, float, float] = CHANNEL_MEAN
    std: tuple[float, float, float] = CHANNEL_STD
    exported: str = ""        # ISO timestamp, filled at write time
    count: int = 0            # embedded crops (0 for a graph export)
    skipped: tuple[str, ...] = field(default_factory=tuple)  # unreadable files


def write_embedding_file(entries: dict[str, np.ndarray], file: str | Path) -> None:
    """Binary layout: magic, u32 dimension, u32 count, then per record a
    u16-length utf-8 crop id and `dimension` little-endian float32 values.
    """
    if not entries:
        raise ExportError("refusing to write an embedding file with zero records")
    dims = {vec.shape for vec in entries.values()}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise ExportError(f"embedding vectors disagree on shape: {sorted(dims)}")
    dimension = next(iter(dims))[0]
    with open(file, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", dimension, len(entries)))
        for crop_id, vec in entries.items():
            ident = crop_id.encode("utf-8")
            if len(ident) > 0xFFFF:
                raise ExportError(f"crop id too long to serialize: {crop_id[:40]!r}...")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(np.asarray(vec, dtype="<f4").tobytes())


def manifest_path(out_file: str | Path) -> Path:
    path = Path(out_file)
    return path.with_name(path.name + ".manifest.json")


def write_manifest(manifest: ExportManifest, out_file: str | Path) -> Path:
    """Write `<out_file>.manifest.json` next to the exported artifact."""
    stamped = ExportManifest(**{**asdict(manifest),
                                "exported": datetime.now(timezone.utc).isoformat()})
    path = manifest_path(out_file)
    payload = asdict(stamped)
    payload["skipped"] = list(stamped.skipped)
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def default_manifest(count: int = 0, skipped: tuple[str, ...] = ()) -> ExportManifest:
    return ExportManifest(model_family="resnet50", dimension=FEATURE_DIM,
                          count=count, skipped=skipped)
