"""Tensor files: ``b"BQT1"``, uint32 ndim, uint64 shape entries, row-major float64 data (little-endian)."""

from __future__ import annotations

import struct

import numpy as np

from .errors import NetFormatError

__all__ = ["TENSOR_MAGIC", "tensor_to_bytes", "tensor_from_bytes", "save_tensor", "load_tensor"]

TENSOR_MAGIC = b"BQT1"


def tensor_to_bytes(values) -> bytes:
    arr = np.ascontiguousarray(np.asarray(values, dtype="<f8"))
    head = TENSOR_MAGIC + struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return head + arr.tobytes(order="C")


def tensor_from_bytes(data: bytes) -> np.ndarray:
    if len(data) < 8 or data[:4] != TENSOR_MAGIC:
        raise NetFormatError("not a BQT1 tensor file (bad magic header)")
    (ndim,) = struct.unpack("<I", data[4:8])
    end = 8 + 8 * ndim
    if len(data) < end:
        raise NetFormatError("tensor header is truncated")
    shape = struct.unpack(f"<{ndim}Q", data[8:end])
    count = int(np.prod(shape)) if ndim else 1
    if len(data) != end + 8 * count:
        raise NetFormatError(f"tensor payload has {len(data) - end} bytes, expected {8 * count} for shape {shape}")
    return np.frombuffer(data[end:], dtype="<f8").reshape(shape).astype(float)


def save_tensor(path, values) -> None:
    with open(path, "wb") as fh:
        fh.write(tensor_to_bytes(values))


def load_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return tensor_from_bytes(fh.read())
