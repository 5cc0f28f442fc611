"""SVCF tensor files: the on-disk interchange format for feature matrices.

Layout (all little-endian):

    magic   4 bytes  "SVCF"
    version u32      1
    ndim    u32
    dims    u32 * ndim
    data    float32 * prod(dims), row-major

Writes are temp-then-rename so a failed run never leaves a partial file.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import MissingFileError, TensorFormatError, UnwritablePathError

MAGIC = b"SVCF"
VERSION = 1


def write_tensor(path: str | os.PathLike, array: np.ndarray) -> None:
    """Write `array` as float32 to an SVCF file, atomically."""
    arr = np.ascontiguousarray(array, dtype=np.float32)
    header = MAGIC + struct.pack("<II", VERSION, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    atomic_write_bytes(path, header + arr.tobytes())


def read_tensor(path: str | os.PathLike) -> np.ndarray:
    """Read an SVCF file back into a float32 array."""
    p = Path(path)
    if not p.exists():
        raise MissingFileError(f"no such tensor file: {p}")
    blob = p.read_bytes()
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise TensorFormatError(f"{p}: bad magic (not an SVCF file)")
    version, ndim = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise TensorFormatError(f"{p}: unsupported version {version}")
    if len(blob) < 12 + 4 * ndim:
        raise TensorFormatError(f"{p}: truncated header")
    dims = struct.unpack_from(f"<{ndim}I", blob, 12)
    count = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    data = blob[12 + 4 * ndim:]
    if len(data) != 4 * count:
        raise TensorFormatError(
            f"{p}: payload is {len(data)} bytes, expected {4 * count}"
        )
    return np.frombuffer(data, dtype="<f4").reshape(dims).copy()


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    """Write bytes via a temp file in the same directory, then rename."""
    p = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=p.parent or ".", prefix=p.name + ".")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, p)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise UnwritablePathError(f"cannot write {p}: {exc}") from exc
