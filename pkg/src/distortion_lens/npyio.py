"""Minimal NPY v1.0 reader/writer restricted to the interchange dtypes.

Feature files must be little-endian IEEE floats (4 or 8 byte), label files
little-endian 8-byte signed integers, C-contiguous. Anything else is rejected
rather than converted so that extractor bugs surface at the boundary.
"""

from __future__ import annotations

import numpy as np
import numpy.lib.format as npy_format

MAGIC = b"\x93NUMPY"

_FLOAT_DTYPES = (np.dtype("<f4"), np.dtype("<f8"))
_LABEL_DTYPE = np.dtype("<i8")


class NpyFormatError(ValueError):
    """Raised when a file is not a conforming NPY v1.0 array."""


def read_array(path, *, allowed_dtypes=None) -> np.ndarray:
    """Read an NPY v1.0 file, optionally restricting the stored dtype."""
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise NpyFormatError(f"{path}: bad magic bytes, not an NPY file")
        version = f.read(2)
        if len(version) < 2 or (version[0], version[1]) != (1, 0):
            raise NpyFormatError(f"{path}: unsupported NPY version {tuple(version)!r}, need (1, 0)")
        try:
            shape, fortran_order, dtype = npy_format.read_array_header_1_0(f)
        except ValueError as exc:
            raise NpyFormatError(f"{path}: malformed NPY header: {exc}") from exc
        if fortran_order:
            raise NpyFormatError(f"{path}: Fortran-ordered arrays are not accepted")
        if allowed_dtypes is not None and dtype not in allowed_dtypes:
            allowed = ", ".join(str(d) for d in allowed_dtypes)
            raise NpyFormatError(f"{path}: dtype {dtype} not allowed (expected one of: {allowed})")
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        data = np.fromfile(f, dtype=dtype, count=count)
        if data.size != count:
            raise NpyFormatError(f"{path}: truncated data, expected {count} items, got {data.size}")
        return data.reshape(shape)


def read_features(path) -> np.ndarray:
    return read_array(path, allowed_dtypes=_FLOAT_DTYPES)


def read_labels(path) -> np.ndarray:
    return read_array(path, allowed_dtypes=(_LABEL_DTYPE,))


def write_array(path, array: np.ndarray) -> None:
    """Write an array as NPY v1.0, coercing to the interchange dtypes."""
    if np.issubdtype(array.dtype, np.floating):
        out = np.ascontiguousarray(array, dtype="<f8" if array.dtype.itemsize == 8 else "<f4")
    elif np.issubdtype(array.dtype, np.integer):
        out = np.ascontiguousarray(array, dtype="<i8")
    else:
        raise NpyFormatError(f"cannot write dtype {array.dtype} in the interchange format")
    with open(path, "wb") as f:
        npy_format.write_array(f, out, version=(1, 0))
