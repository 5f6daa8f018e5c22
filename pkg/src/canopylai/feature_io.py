"""Feature file serialization: CSV with header `crop_id,lai,f0,...,f{d-1}`.

Values are written with repr() so every float round-trips bit-exactly, which
also makes re-extraction byte-identical for identical inputs.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .dataset import LabeledSample
from .errors import DataError


def write_features(samples: list[LabeledSample], file: str | Path) -> None:
    if not samples:
        raise DataError("refusing to write an empty feature file")
    d = samples[0].features.shape[0]
    with open(Path(file), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["crop_id", "lai"] + [f"f{i}" for i in range(d)])
        for s in samples:
            if s.features.shape[0] != d:
                raise DataError(f"sample {s.crop_id!r} has {s.features.shape[0]} features, expected {d}")
            writer.writerow([s.crop_id, repr(s.lai)] + [repr(float(v)) for v in s.features])


def read_features(file: str | Path) -> list[LabeledSample]:
    path = Path(file)
    if not path.is_file():
        raise DataError(f"feature file not found: {path}")
    samples: list[LabeledSample] = []
    expected = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["crop_id", "lai"]:
            raise DataError(f"feature file {path}: header must start with `crop_id,lai`")
        d = len(header) - 2
        if d < 1:
            raise DataError(f"feature file {path}: no feature columns")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 2:
                raise DataError(f"feature file {path} line {line_no}: expected {d + 2} columns, got {len(row)}")
            try:
                lai = float(row[1])
                features = np.array(row[2:], dtype=np.float64)
            except ValueError:
                raise DataError(f"feature file {path} line {line_no}: unparseable number") from None
            samples.append(LabeledSample(features=features, lai=lai, crop_id=row[0]))
            expected = d
    if expected is None:
        raise DataError(f"feature file {path}: no data rows")
    return samples
