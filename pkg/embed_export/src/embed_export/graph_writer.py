"""Serialize the ResNet50 trunk as an ONNX graph, protobuf hand-encoded.

Emits the operator subset the consuming pipeline executes: Conv,
BatchNormalization, Relu, MaxPool, Add, GlobalAveragePool, Flatten. One
input `data` (N x 3 x H x W, dynamic batch), one output `embedding`
(N x 2048), all tensors float32, default operator domain, opset 13.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn
from torchvision.models.resnet import Bottleneck

from .backbone import FEATURE_DIM, INPUT_SIZE
from .errors import ExportError
from .protowire import f_bytes, f_fixed32, f_string, f_varint, varint

FLOAT32 = 1
OPSET = 13

ATTR_FLOAT, ATTR_INT, ATTR_INTS = 1, 2, 7


def attr_int(name: str, value: int) -> bytes:
    return f_bytes(5, f_string(1, name) + f_varint(3, value) + f_varint(20, ATTR_INT))


def attr_float(name: str, value: float) -> bytes:
    return f_bytes(5, f_string(1, name) + f_fixed32(2, value) + f_varint(20, ATTR_FLOAT))


def attr_ints(name: str, values) -> bytes:
    packed = f_bytes(8, b"".join(varint(int(v)) for v in values))
    return f_bytes(5, f_string(1, name) + packed + f_varint(20, ATTR_INTS))


def tensor_bytes(name: str, array: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(array, dtype="<f4")
    dims = b"".join(f_varint(1, d) for d in arr.shape)
    return dims + f_varint(2, FLOAT32) + f_string(8, name) + f_bytes(9, arr.tobytes())


def node_bytes(op_type: str, inputs, outputs, attrs: bytes = b"") -> bytes:
    parts = [f_string(1, name) for name in inputs]
    parts += [f_string(2, name) for name in outputs]
    parts.append(f_string(4, op_type))
    parts.append(attrs)
    return b"".join(parts)


def value_info_bytes(name: str, shape) -> bytes:
    dims = b""
    for d in shape:
        if isinstance(d, str):
            dims += f_bytes(1, f_string(2, d))
        else:
            dims += f_bytes(1, f_varint(1, int(d)))
    tensor_type = f_varint(1, FLOAT32) + f_bytes(2, dims)
    return f_string(1, name) + f_bytes(2, f_bytes(1, tensor_type))


def _pair(value) -> tuple[int, int]:
    if isinstance(value, int):
        return value, value
    return int(value[0]), int(value[1])


class _GraphBuilder:
    def __init__(self):
        self.nodes: list[bytes] = []
        self.initializers: list[bytes] = []

    def param(self, name: str, tensor: torch.Tensor) -> str:
        self.initializers.append(tensor_bytes(name, tensor.detach().cpu().numpy()))
        return name

    def conv(self, name: str, module: nn.Conv2d, x: str) -> str:
        if module.groups != 1 or _pair(module.dilation) != (1, 1):
            raise ExportError(f"{name}: grouped or dilated convolutions are not exportable")
        if isinstance(module.padding, str):
            raise ExportError(f"{name}: string padding modes are not exportable")
        ph, pw = _pair(module.padding)
        inputs = [x, self.param(f"{name}.weight", module.weight)]
        if module.bias is not None:
            inputs.append(self.param(f"{name}.bias", module.bias))
        out = f"{name}_out"
        self.nodes.append(node_bytes(
            "Conv", inputs, [out],
            attr_ints("kernel_shape", _pair(module.kernel_size))
            + attr_ints("strides", _pair(module.stride))
            + attr_ints("pads", [ph, pw, ph, pw])))
        return out

    def batchnorm(self, name: str, module: nn.BatchNorm2d, x: str) -> str:
        out = f"{name}_out"
        self.nodes.append(node_bytes(
            "BatchNormalization",
            [x,
             self.param(f"{name}.weight", module.weight),
             self.param(f"{name}.bias", module.bias),
             self.param(f"{name}.running_mean", module.running_mean),
             self.param(f"{name}.running_var", module.running_var)],
            [out], attr_float("epsilon", float(module.eps))))
        return out

    def relu(self, name: str, x: str) -> str:
        out = f"{name}_out"
        self.nodes.append(node_bytes("Relu", [x], [out]))
        return out

    def maxpool(self, name: str, module: nn.MaxPool2d, x: str) -> str:
        if module.ceil_mode or _pair(module.dilation) != (1, 1):
            raise ExportError(f"{name}: ceil-mode or dilated pooling is not exportable")
        ph, pw = _pair(module.padding)
        out = f"{name}_out"
        self.nodes.append(node_bytes(
            "MaxPool", [x], [out],
            attr_ints("kernel_shape", _pair(module.kernel_size))
            + attr_ints("strides", _pair(module.stride))
            + attr_ints("pads", [ph, pw, ph, pw])))
        return out

    def add(self, name: str, a: str, b: str) -> str:
        out = f"{name}_out"
        self.nodes.append(node_bytes("Add", [a, b], [out]))
        return out


def _emit_bottleneck(builder: _GraphBuilder, prefix: str, block: Bottleneck, x: str) -> str:
    out = builder.conv(f"{prefix}.conv1", block.conv1, x)
    out = builder.batchnorm(f"{prefix}.bn1", block.bn1, out)
    out = builder.relu(f"{prefix}.relu1", out)
    out = builder.conv(f"{prefix}.conv2", block.conv2, out)
    out = builder.batchnorm(f"{prefix}.bn2", block.bn2, out)
    out = builder.relu(f"{prefix}.relu2", out)
    out = builder.conv(f"{prefix}.conv3", block.conv3, out)
    out = builder.batchnorm(f"{prefix}.bn3", block.bn3, out)
    identity = x
    if block.downsample is not None:
        identity = builder.conv(f"{prefix}.downsample.0", block.downsample[0], x)
        identity = builder.batchnorm(f"{prefix}.downsample.1", block.downsample[1], identity)
    out = builder.add(f"{prefix}.add", out, identity)
    return builder.relu(f"{prefix}.relu3", out)


def graph_bytes(model: nn.Module, input_size: int = INPUT_SIZE) -> bytes:
    """Serialize a build_backbone() trunk; returns the model file contents."""
    if not isinstance(getattr(model, "avgpool", None), nn.AdaptiveAvgPool2d) \
            or _pair(model.avgpool.output_size) != (1, 1):
        raise ExportError("expected a trunk ending in global average pooling")

    builder = _GraphBuilder()
    x = builder.conv("conv1", model.conv1, "data")
    x = builder.batchnorm("bn1", model.bn1, x)
    x = builder.relu("relu1", x)
    x = builder.maxpool("maxpool", model.maxpool, x)
    for index in (1, 2, 3, 4):
        layer = getattr(model, f"layer{index}")
        for block_index, block in enumerate(layer):
            if not isinstance(block, Bottleneck):
                raise ExportError(f"layer{index}.{block_index}: unsupported block type "
                                  f"{type(block).__name__}")
            x = _emit_bottleneck(builder, f"layer{index}.{block_index}", block, x)
    builder.nodes.append(node_bytes("GlobalAveragePool", [x], ["pooled"]))
    builder.nodes.append(node_bytes("Flatten", ["pooled"], ["embedding"], attr_int("axis", 1)))

    graph = b"".join(f_bytes(1, n) for n in builder.nodes)
    graph += f_string(2, "resnet50_trunk")
    graph += b"".join(f_bytes(5, t) for t in builder.initializers)
    graph += f_bytes(11, value_info_bytes("data", ["N", 3, input_size, input_size]))
    graph += f_bytes(12, value_info_bytes("embedding", ["N", FEATURE_DIM]))
    opset_entry = f_string(1, "") + f_varint(2, OPSET)
    return f_varint(1, 8) + f_bytes(7, graph) + f_bytes(8, opset_entry)
