"""Matrix file formats.

CSV: first line holds ``rows,cols``; then one matrix row per line.
Binary: two little-endian uint64 (rows, cols) followed by rows*cols
little-endian float64 values in row-major order.
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .matrix_core import as_matrix

__all__ = ["read_csv", "write_csv", "read_bin", "write_bin", "load_matrix", "save_matrix"]

_HEADER = struct.Struct("<QQ")


def read_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != 2:
            raise ValueError(f"{path}: first line must be 'rows,cols'")
        rows, cols = int(header[0]), int(header[1])
        data = [[float(x) for x in line] for line in reader if line]
    M = np.array(data, dtype=np.float64)
    if M.shape != (rows, cols):
        raise ValueError(f"{path}: header says {(rows, cols)} but body has shape {M.shape}")
    return as_matrix(M, str(path))


def write_csv(path, M) -> None:
    M = as_matrix(M)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(M.shape)
        # repr round-trips float64 exactly
        writer.writerows([[repr(float(x)) for x in row] for row in M])


def read_bin(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    rows, cols = _HEADER.unpack_from(raw)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} values, found {body.size}")
    return as_matrix(body.reshape(rows, cols).astype(np.float64), str(path))


def write_bin(path, M) -> None:
    M = as_matrix(M)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(*M.shape))
        fh.write(np.ascontiguousarray(M, dtype="<f8").tobytes())


def load_matrix(path) -> np.ndarray:
    """Dispatch on suffix: ``.csv`` or anything else as binary."""
    return read_csv(path) if str(path).lower().endswith(".csv") else read_bin(path)


def save_matrix(path, M) -> None:
    if str(path).lower().endswith(".csv"):
        write_csv(path, M)
    else:
        write_bin(path, M)
