"""Minimal protobuf wire-format encoder for the graph serializer.

Only what the interchange format needs: varints, length-delimited fields and
little-endian fixed32 floats. Message layouts live in graph_writer.
"""

from __future__ import annotations

import struct


def varint(n: int) -> bytes:
    if n < 0:
        n += 1 << 64
    out = bytearray()
    while True:
        byte = n & 0x7F
        n >>= 7
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def tag(field: int, wire: int) -> bytes:
    return varint((field << 3) | wire)


def f_varint(field: int, value: int) -> bytes:
    return tag(field, 0) + varint(value)


def f_bytes(field: int, payload: bytes) -> bytes:
    return tag(field, 2) + varint(len(payload)) + payload


def f_string(field: int, text: str) -> bytes:
    return f_bytes(field, text.encode("utf-8"))


def f_fixed32(field: int, value: float) -> bytes:
    return tag(field, 5) + struct.pack("<f", value)
