"""Minimal reader and executor for serialized inference graphs in the ONNX
interchange format (protobuf wire encoding), covering the operator subset a
pooled convolutional feature extractor needs: Conv, BatchNormalization, Relu,
MaxPool, Add, GlobalAveragePool, Flatten, Gemm, Identity.

The decoder is a hand-rolled protobuf wire-format walker (no protobuf
dependency): it understands varint, 32/64-bit and length-delimited fields and
maps the field numbers of the ONNX message types it needs. Execution is plain
numpy in float32. Structural problems (unparseable file, bad shapes declared)
raise DataError; runtime problems (unsupported operator, shape mismatch)
raise ComputationError.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ComputationError, DataError

# TensorProto.DataType values we accept
_DTYPES = {1: np.float32, 6: np.int32, 7: np.int64, 11: np.float64}

# AttributeProto.AttributeType discriminator values
_ATTR_FLOAT, _ATTR_INT, _ATTR_STRING, _ATTR_TENSOR = 1, 2, 3, 4
_ATTR_FLOATS, _ATTR_INTS = 6, 7

MIN_OPSET = 13


def _to_int64(value: int) -> int:
    return value - (1 << 64) if value >= (1 << 63) else value


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise DataError("truncated varint in graph file")
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise DataError("malformed varint in graph file")


def _fields(buf: bytes):
    """Yield (field_number, wire_type, value) over one message's bytes.

    Values are ints for varints and raw bytes for the other wire types.
    """
    pos = 0
    n = len(buf)
    while pos < n:
        tag, pos = _read_varint(buf, pos)
        fieldno, wire = tag >> 3, tag & 7
        if wire == 0:
            value, pos = _read_varint(buf, pos)
        elif wire == 1:
            value, pos = buf[pos:pos + 8], pos + 8
        elif wire == 2:
            length, pos = _read_varint(buf, pos)
            value, pos = buf[pos:pos + length], pos + length
        elif wire == 5:
            value, pos = buf[pos:pos + 4], pos + 4
        else:
            raise DataError(f"unsupported protobuf wire type {wire}")
        if pos > n:
            raise DataError("truncated field in graph file")
        yield fieldno, wire, value


def _packed_varints(wire: int, value) -> list[int]:
    # proto3 serializers may pack repeated integers; accept both encodings
    if wire == 0:
        return [_to_int64(value)]
    out = []
    pos = 0
    while pos < len(value):
        v, pos = _read_varint(value, pos)
        out.append(_to_int64(v))
    return out


def _parse_tensor(buf: bytes) -> tuple[str, np.ndarray]:
    dims: list[int] = []
    dtype_code = 1
    raw = None
    floats: list[bytes] = []
    int64s: list[int] = []
    int32s: list[int] = []
    name = ""
    for f, w, v in _fields(buf):
        if f == 1:
            dims.extend(_packed_varints(w, v))
        elif f == 2:
            dtype_code = v
        elif f == 4:
            floats.append(v if w == 2 else bytes(v))
        elif f == 5:
            int32s.extend(_packed_varints(w, v))
        elif f == 7:
            int64s.extend(_packed_varints(w, v))
        elif f == 8:
            name = v.decode("utf-8")
        elif f == 9:
            raw = v
    if dtype_code not in _DTYPES:
        raise DataError(f"tensor {name!r}: unsupported element type code {dtype_code}")
    dtype = _DTYPES[dtype_code]
    if raw is not None:
        arr = np.frombuffer(raw, dtype=np.dtype(dtype).newbyteorder("<")).astype(dtype)
    elif floats:
        arr = np.frombuffer(b"".join(floats), dtype="<f4").astype(np.float32)
    elif int64s:
        arr = np.array(int64s, dtype=np.int64)
    elif int32s:
        arr = np.array(int32s, dtype=np.int32)
    else:
        arr = np.zeros(0, dtype=dtype)
    try:
        arr = arr.reshape(dims) if dims else arr.reshape(())
    except ValueError:
        raise DataError(f"tensor {name!r}: payload does not match dims {dims}") from None
    return name, arr


def _parse_attribute(buf: bytes):
    name = ""
    kind = 0
    f_val = 0.0
    i_val = 0
    s_val = b""
    t_val = None
    floats: list[float] = []
    ints: list[int] = []
    for f, w, v in _fields(buf):
        if f == 1:
            name = v.decode("utf-8")
        elif f == 2:
            f_val = float(np.frombuffer(v, dtype="<f4")[0])
        elif f == 3:
            i_val = _to_int64(v)
        elif f == 4:
            s_val = v
        elif f == 5:
            t_val = _parse_tensor(v)[1]
        elif f == 7:
            if w == 2:
                floats.extend(np.frombuffer(v, dtype="<f4").tolist())
            else:
                floats.append(float(np.frombuffer(v, dtype="<f4")[0]))
        elif f == 8:
            ints.extend(_packed_varints(w, v))
        elif f == 20:
            kind = v
    if kind == _ATTR_FLOAT:
        return name, f_val
    if kind == _ATTR_INT:
        return name, i_val
    if kind == _ATTR_STRING:
        return name, s_val
    if kind == _ATTR_TENSOR:
        return name, t_val
    if kind == _ATTR_FLOATS:
        return name, floats
    if kind == _ATTR_INTS:
        return name, ints
    # no discriminator: fall back to whichever field carried data
    for candidate in (ints or None, floats or None, t_val, s_val or None):
        if candidate is not None:
            return name, candidate
    return name, i_val if i_val else f_val


@dataclass(frozen=True)
class GraphNode:
    op_type: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    attrs: dict


@dataclass(frozen=True)
class OnnxGraph:
    nodes: tuple[GraphNode, ...]
    initializers: dict[str, np.ndarray]
    input_name: str
    input_shape: tuple  # ints, or None for dynamic dims
    output_name: str
    opset: int = MIN_OPSET
    doc: str = ""


def _parse_value_info(buf: bytes) -> tuple[str, tuple]:
    name = ""
    shape: list = []
    for f, w, v in _fields(buf):
        if f == 1:
            name = v.decode("utf-8")
        elif f == 2:
            for tf, _, tv in _fields(v):
                if tf != 1:  # TypeProto.tensor_type
                    continue
                for sf, _, sv in _fields(tv):
                    if sf != 2:  # TensorTypeProto.shape
                        continue
                    for df, _, dv in _fields(sv):
                        if df != 1:  # TensorShapeProto.dim
                            continue
                        dim = None
                        for ddf, ddw, ddv in _fields(dv):
                            if ddf == 1:
                                dim = _to_int64(ddv)
                        shape.append(dim)
    return name, tuple(shape)


def _parse_node(buf: bytes) -> GraphNode:
    inputs: list[str] = []
    outputs: list[str] = []
    op_type = ""
    attrs: dict = {}
    for f, w, v in _fields(buf):
        if f == 1:
            inputs.append(v.decode("utf-8"))
        elif f == 2:
            outputs.append(v.decode("utf-8"))
        elif f == 4:
            op_type = v.decode("utf-8")
        elif f == 5:
            k, val = _parse_attribute(v)
            attrs[k] = val
        elif f == 7 and v:
            raise DataError(f"node operator domain {v.decode('utf-8')!r} not supported")
    return GraphNode(op_type=op_type, inputs=tuple(inputs), outputs=tuple(outputs), attrs=attrs)


def _parse_graph(buf: bytes) -> OnnxGraph:
    nodes: list[GraphNode] = []
    initializers: dict[str, np.ndarray] = {}
    inputs: list[tuple[str, tuple]] = []
    outputs: list[tuple[str, tuple]] = []
    for f, w, v in _fields(buf):
        if f == 1:
            nodes.append(_parse_node(v))
        elif f == 5:
            name, arr = _parse_tensor(v)
            initializers[name] = arr
        elif f == 11:
            inputs.append(_parse_value_info(v))
        elif f == 12:
            outputs.append(_parse_value_info(v))
    feeds = [(n, s) for n, s in inputs if n not in initializers]
    if len(feeds) != 1:
        raise DataError(f"graph must declare exactly one data input, found {len(feeds)}")
    if len(outputs) != 1:
        raise DataError(f"graph must declare exactly one output, found {len(outputs)}")
    return OnnxGraph(
        nodes=tuple(nodes),
        initializers=initializers,
        input_name=feeds[0][0],
        input_shape=feeds[0][1],
        output_name=outputs[0][0],
    )


def load_graph(path) -> OnnxGraph:
    """Parse a serialized inference graph file; DataError if malformed."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read graph file {path}: {exc}") from exc
    graph_buf = None
    opset = 0
    try:
        for f, w, v in _fields(blob):
            if f == 7 and w == 2:
                graph_buf = v
            elif f == 8 and w == 2:
                domain, version = "", 0
                for of, _, ov in _fields(v):
                    if of == 1:
                        domain = ov.decode("utf-8")
                    elif of == 2:
                        version = _to_int64(ov)
                if domain in ("", "ai.onnx"):
                    opset = max(opset, version)
        if graph_buf is None:
            raise DataError("file carries no graph message")
        if opset < MIN_OPSET:
            raise DataError(f"graph declares operator set {opset}, need >= {MIN_OPSET}")
        graph = _parse_graph(graph_buf)
    except DataError as exc:
        raise DataError(f"invalid model graph file {path}: {exc}") from None
    return OnnxGraph(
        nodes=graph.nodes,
        initializers=graph.initializers,
        input_name=graph.input_name,
        input_shape=graph.input_shape,
        output_name=graph.output_name,
        opset=opset,
    )


def _pads4(attrs: dict) -> tuple[int, int, int, int]:
    pads = [int(p) for p in attrs.get("pads", [0, 0, 0, 0])]
    if len(pads) != 4:
        raise ComputationError(f"expected 4 spatial pads, got {pads}")
    return pads[0], pads[1], pads[2], pads[3]  # top, left, bottom, right


def _pool_windows(x: np.ndarray, kh: int, kw: int, sh: int, sw: int):
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))
    return win[:, :, ::sh, ::sw]


def _op_conv(ins, attrs):
    if int(attrs.get("group", 1)) != 1:
        raise ComputationError("grouped convolution not supported")
    if any(int(d) != 1 for d in attrs.get("dilations", [1, 1])):
        raise ComputationError("dilated convolution not supported")
    x, w = ins[0], ins[1]
    bias = ins[2] if len(ins) > 2 else None
    pt, pl, pb, pr = _pads4(attrs)
    sh, sw = (int(s) for s in attrs.get("strides", [1, 1]))
    kh, kw = w.shape[2], w.shape[3]
    xp = np.pad(x, ((0, 0), (0, 0), (pt, pb), (pl, pr)))
    win = _pool_windows(xp, kh, kw, sh, sw)
    out = np.tensordot(win, w, axes=((1, 4, 5), (1, 2, 3))).transpose(0, 3, 1, 2)
    out = np.ascontiguousarray(out, dtype=np.float32)
    if bias is not None:
        out += bias.astype(np.float32)[None, :, None, None]
    return out


def _op_batchnorm(ins, attrs):
    x, scale, shift, mean, var = (a.astype(np.float32) for a in ins[:5])
    eps = np.float32(attrs.get("epsilon", 1e-5))
    factor = scale / np.sqrt(var + eps)
    offset = shift - mean * factor
    return x * factor[None, :, None, None] + offset[None, :, None, None]


def _op_maxpool(ins, attrs):
    x = ins[0]
    kh, kw = (int(k) for k in attrs["kernel_shape"])
    sh, sw = (int(s) for s in attrs.get("strides", [1, 1]))
    pt, pl, pb, pr = _pads4(attrs)
    xp = np.pad(x, ((0, 0), (0, 0), (pt, pb), (pl, pr)), constant_values=-np.inf)
    return _pool_windows(xp, kh, kw, sh, sw).max(axis=(4, 5)).astype(np.float32)


def _op_gemm(ins, attrs):
    a, b = ins[0], ins[1]
    if int(attrs.get("transA", 0)):
        a = a.T
    if int(attrs.get("transB", 0)):
        b = b.T
    out = np.float32(attrs.get("alpha", 1.0)) * (a @ b)
    if len(ins) > 2:
        out = out + np.float32(attrs.get("beta", 1.0)) * ins[2]
    return out.astype(np.float32)


def _op_flatten(ins, attrs):
    x = ins[0]
    axis = int(attrs.get("axis", 1))
    lead = int(np.prod(x.shape[:axis], dtype=np.int64)) if axis else 1
    return x.reshape(lead, -1)


_KERNELS = {
    "Conv": _op_conv,
    "BatchNormalization": _op_batchnorm,
    "Relu": lambda ins, attrs: np.maximum(ins[0], np.float32(0)),
    "MaxPool": _op_maxpool,
    "Add": lambda ins, attrs: (ins[0] + ins[1]).astype(np.float32),
    "GlobalAveragePool": lambda ins, attrs: ins[0].mean(axis=(2, 3), keepdims=True).astype(np.float32),
    "Flatten": _op_flatten,
    "Gemm": _op_gemm,
    "Identity": lambda ins, attrs: ins[0],
}


def execute_graph(graph: OnnxGraph, batch: np.ndarray) -> np.ndarray:
    """Run the graph on one input batch, nodes in stored (topological) order."""
    declared = graph.input_shape
    if declared and len(declared) == batch.ndim:
        for want, got in zip(declared[1:], batch.shape[1:]):
            if want is not None and want != got:
                raise ComputationError(
                    f"graph input declares shape {declared}, batch has {batch.shape}")
    values: dict[str, np.ndarray] = dict(graph.initializers)
    values[graph.input_name] = np.ascontiguousarray(batch, dtype=np.float32)
    for node in graph.nodes:
        kernel = _KERNELS.get(node.op_type)
        if kernel is None:
            raise ComputationError(f"unsupported graph operator {node.op_type!r}")
        try:
            ins = [values[name] for name in node.inputs if name]
        except KeyError as exc:
            raise ComputationError(f"{node.op_type} node consumes unknown tensor {exc.args[0]!r}") from None
        result = kernel(ins, node.attrs)
        outs = result if isinstance(result, tuple) else (result,)
        for name, val in zip(node.outputs, outs):
            values[name] = val
    if graph.output_name not in values:
        raise ComputationError(f"graph never produced its declared output {graph.output_name!r}")
    return values[graph.output_name]
