# FPMX matrix files: b"FPMX", u32 rows, u32 cols (little-endian), then
# rows*cols little-endian float64 values, row-major.

import struct
from pathlib import Path

import numpy as np

from fedpower.exceptions import FormatError, ShapeError
from fedpower.utils import logger

MAGIC = b"FPMX"
_HEADER = struct.Struct("<4sII")


def dumps(matrix):
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"FPMX stores 2-D matrices, got {m.ndim}-D")
    rows, cols = m.shape
    return _HEADER.pack(MAGIC, rows, cols) + m.astype("<f8").tobytes(order="C")


def loads(payload):
    if len(payload) < _HEADER.size:
        raise FormatError("FPMX payload shorter than its header")
    magic, rows, cols = _HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise FormatError(f"bad FPMX magic {magic!r}")
    expected = _HEADER.size + rows * cols * 8
    if len(payload) != expected:
        raise FormatError(f"FPMX payload is {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype="<f8", offset=_HEADER.size, count=rows * cols)
    matrix = data.astype(np.float64).reshape(rows, cols)
    if not np.all(np.isfinite(matrix)):
        raise FormatError("FPMX payload holds non-finite values")
    return matrix


def write_matrix(path, matrix):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(matrix))
    logger("matrix_io").debug(f"wrote {path} {np.shape(matrix)}")
    return path


def read_matrix(path):
    return loads(Path(path).read_bytes())
