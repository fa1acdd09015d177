"""Flat binary tensor container used for every array artifact.

Layout (little-endian):

    bytes 0..5   magic ``UTNSR1``
    byte  6      dtype code: 0 = float32, 1 = float64
    byte  7      rank
    next 8*rank  dims as u64
    rest         row-major (C-order) payload

An optional JSON sidecar lives next to the tensor as ``<file>.json``
(e.g. ``img.tnsr`` -> ``img.tnsr.json``) and carries provenance:
whatever dict the writer passes, typically config values plus sha256
hashes of the inputs that produced the artifact.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataError

MAGIC = b"UTNSR1"

_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODE_FOR_DTYPE = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}


def write_tensor(path: str | Path, array: np.ndarray, sidecar: dict | None = None) -> Path:
    """Write ``array`` (float32 or float64) to ``path`` in the UTNSR1 format."""
    path = Path(path)
    arr = np.asarray(array)
    if arr.dtype not in _CODE_FOR_DTYPE:
        raise DataError(f"tensor files hold float32/float64 only, got {arr.dtype}")
    code = _CODE_FOR_DTYPE[arr.dtype]
    header = MAGIC + struct.pack("<BB", code, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape) if arr.ndim else b""
    payload = np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes()
    path.write_bytes(header + payload)
    if sidecar is not None:
        sidecar_path(path).write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a UTNSR1 tensor back as a numpy array."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 8 or raw[:6] != MAGIC:
        raise DataError(f"{path}: not a UTNSR1 tensor file")
    code, rank = struct.unpack_from("<BB", raw, 6)
    if code not in _DTYPE_CODES:
        raise DataError(f"{path}: unknown dtype code {code}")
    dtype = _DTYPE_CODES[code]
    offset = 8 + 8 * rank
    if len(raw) < offset:
        raise DataError(f"{path}: truncated header")
    dims = struct.unpack_from(f"<{rank}Q", raw, 8) if rank else ()
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize if rank else dtype.itemsize
    if len(raw) - offset != expected:
        raise DataError(
            f"{path}: payload is {len(raw) - offset} bytes, dims {dims} require {expected}"
        )
    return np.frombuffer(raw, dtype=dtype, offset=offset).reshape(dims).copy()


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".json")


def read_sidecar(path: str | Path) -> dict | None:
    """Return the JSON sidecar for a tensor file, or None if absent."""
    sc = sidecar_path(path)
    if not sc.exists():
        return None
    return json.loads(sc.read_text())


def sha256_file(path: str | Path) -> str:
    """Hex digest of a file, for provenance sidecars."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_array(array: np.ndarray) -> str:
    """Hex digest of an array's contiguous bytes (shape-tagged)."""
    h = hashlib.sha256()
    h.update(str(array.shape).encode())
    h.update(np.ascontiguousarray(array).tobytes())
    return h.hexdigest()
