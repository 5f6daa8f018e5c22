"""Binary model container shared by all regressors.

Layout (little-endian throughout):
  magic `LAIM` | u32 version | kind string | extractor string
  | standardizer: u32 d, d x f64 mean, d x f64 std
  | kind-specific payload (f64 numbers, u32-length-prefixed arrays)
  | u32 CRC32 over everything between magic and the checksum

Strings are u16 length + UTF-8. Floats travel as raw 64-bit words, so a
load/save round trip reproduces predictions exactly.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import DataError
from .forest import ForestModel, RegressionTree
from .linear import LinearModel
from .prepare import StandardizerParams
from .svr import SvrModel

MAGIC = b"LAIM"
VERSION = 1

Model = LinearModel | SvrModel | ForestModel

_KINDS = {LinearModel: "linear", SvrModel: "svr", ForestModel: "forest"}


def _pack_str(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise DataError(f"string too long to serialize: {text[:40]!r}...")
    return struct.pack("<H", len(raw)) + raw


def _pack_f64(arr: np.ndarray) -> bytes:
    data = np.ascontiguousarray(arr, dtype="<f8")
    return struct.pack("<I", data.size) + data.tobytes()


def _pack_i32(arr: np.ndarray) -> bytes:
    data = np.ascontiguousarray(arr, dtype="<i4")
    return struct.pack("<I", data.size) + data.tobytes()


class _Cursor:
    """Bounds-checked reader over the container body."""

    def __init__(self, blob: bytes, context: str):
        self.blob = blob
        self.pos = 0
        self.context = context

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.blob):
            raise DataError(f"{self.context}: truncated model file")
        chunk = self.blob[self.pos:self.pos + count]
        self.pos += count
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def text(self) -> str:
        return self.take(self.u16()).decode("utf-8")

    def f64_array(self) -> np.ndarray:
        count = self.u32()
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def i32_array(self) -> np.ndarray:
        count = self.u32()
        return np.frombuffer(self.take(4 * count), dtype="<i4").astype(np.int32)

    def done(self) -> bool:
        return self.pos == len(self.blob)


def _payload_linear(m: LinearModel) -> bytes:
    return struct.pack("<dd", m.intercept, m.ridge) + _pack_f64(m.coefficients)


def _payload_svr(m: SvrModel) -> bytes:
    sv = np.ascontiguousarray(m.support_vectors, dtype="<f8")
    return (struct.pack("<dddd", m.bias, m.gamma, m.C, m.epsilon)
            + struct.pack("<II", sv.shape[0], sv.shape[1])
            + _pack_f64(m.dual_coefs) + sv.tobytes())


def _payload_forest(m: ForestModel) -> bytes:
    parts = [struct.pack("<IqIBI", m.B, m.seed, m.feature_subsample, int(m.bootstrap), m.min_samples_leaf)]
    for tree in m.trees:
        parts.append(struct.pack("<I", tree.feature.size))
        parts.append(_pack_i32(tree.feature))
        parts.append(_pack_f64(tree.threshold))
        parts.append(_pack_i32(tree.left))
        parts.append(_pack_i32(tree.right))
        parts.append(_pack_f64(tree.value))
    return b"".join(parts)


def save_model(model: Model, file: str | Path) -> None:
    """Write any trained model; kind is inferred from the model's type."""
    kind = _KINDS.get(type(model))
    if kind is None:
        raise DataError(f"cannot serialize object of type {type(model).__name__}")
    if kind == "linear":
        payload = _payload_linear(model)
    elif kind == "svr":
        payload = _payload_svr(model)
    else:
        payload = _payload_forest(model)
    body = (struct.pack("<I", VERSION) + _pack_str(kind) + _pack_str(model.extractor)
            + _pack_f64(model.standardizer.mean) + _pack_f64(model.standardizer.std)
            + payload)
    with open(Path(file), "wb") as fh:
        fh.write(MAGIC + body + struct.pack("<I", zlib.crc32(body)))


def _load_linear(cur: _Cursor, std: StandardizerParams, extractor: str) -> LinearModel:
    intercept, ridge = struct.unpack("<dd", cur.take(16))
    coefs = cur.f64_array()
    return LinearModel(intercept=intercept, coefficients=coefs, standardizer=std,
                       ridge=ridge, extractor=extractor)


def _load_svr(cur: _Cursor, std: StandardizerParams, extractor: str) -> SvrModel:
    bias, gamma, C, epsilon = struct.unpack("<dddd", cur.take(32))
    m, d = struct.unpack("<II", cur.take(8))
    dual = cur.f64_array()
    if dual.size != m:
        raise DataError(f"{cur.context}: dual coefficient count {dual.size} != {m}")
    sv = np.frombuffer(cur.take(8 * m * d), dtype="<f8").astype(np.float64).reshape(m, d)
    return SvrModel(support_vectors=sv, dual_coefs=dual, bias=bias, gamma=gamma,
                    C=C, epsilon=epsilon, standardizer=std, extractor=extractor)


def _load_forest(cur: _Cursor, std: StandardizerParams, extractor: str) -> ForestModel:
    B, seed, n_feats, boot, min_leaf = struct.unpack("<IqIBI", cur.take(21))
    trees = []
    for _ in range(B):
        nodes = cur.u32()
        feature = cur.i32_array()
        threshold = cur.f64_array()
        left = cur.i32_array()
        right = cur.i32_array()
        value = cur.f64_array()
        if not (feature.size == threshold.size == left.size == right.size == value.size == nodes):
            raise DataError(f"{cur.context}: inconsistent tree node arrays")
        trees.append(RegressionTree(feature=feature, threshold=threshold,
                                    left=left, right=right, value=value))
    return ForestModel(trees=tuple(trees), B=B, seed=seed, feature_subsample=n_feats,
                       bootstrap=bool(boot), min_samples_leaf=min_leaf,
                       standardizer=std, extractor=extractor)


def load_model(file: str | Path) -> Model:
    """Read a model container back; DataError on corruption or unknown kinds."""
    path = Path(file)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    context = f"model file {path}"
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise DataError(f"{context}: not a model container (bad magic)")
    body, stored = blob[4:-4], struct.unpack("<I", blob[-4:])[0]
    if zlib.crc32(body) != stored:
        raise DataError(f"{context}: checksum mismatch, file is corrupt or truncated")
    cur = _Cursor(body, context)
    version = cur.u32()
    if version != VERSION:
        raise DataError(f"{context}: unsupported container version {version}")
    kind = cur.text()
    extractor = cur.text()
    mean = cur.f64_array()
    std_arr = cur.f64_array()
    if mean.size != std_arr.size:
        raise DataError(f"{context}: standardizer mean/std length mismatch")
    std = StandardizerParams(mean=mean, std=std_arr)
    if kind == "linear":
        model = _load_linear(cur, std, extractor)
    elif kind == "svr":
        model = _load_svr(cur, std, extractor)
    elif kind == "forest":
        model = _load_forest(cur, std, extractor)
    else:
        raise DataError(f"{context}: unknown model kind tag {kind!r}")
    if not cur.done():
        raise DataError(f"{context}: {len(body) - cur.pos} unexpected trailing bytes")
    return model
