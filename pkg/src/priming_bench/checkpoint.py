"""Binary parameter checkpoints.

Layout (all integers little-endian uint32)::

    b"PBCK" | version | meta_len | meta (UTF-8 JSON) | count
    count x ( name_len | name | ndim | dims... | float64 LE data )

Entries are written in sorted name order so identical parameters give
identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

MAGIC = b"PBCK"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def encode_params(arrays: Mapping[str, np.ndarray], meta: Optional[dict] = None) -> bytes:
    meta_bytes = json.dumps(meta or {}, sort_keys=True, ensure_ascii=False).encode("utf-8")
    out = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(meta_bytes)), meta_bytes,
           struct.pack("<I", len(arrays))]
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name], dtype="<f8")
        raw = name.encode("utf-8")
        out.append(struct.pack("<I", len(raw)) + raw)
        out.append(struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape))
        out.append(arr.tobytes(order="C"))
    return b"".join(out)


def decode_params(blob: bytes) -> tuple[dict, dict]:
    """Return ``(arrays, meta)``."""
    if blob[:4] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    pos = 4

    def take(fmt):
        nonlocal pos
        size = struct.calcsize(fmt)
        if pos + size > len(blob):
            raise CheckpointError("truncated checkpoint")
        vals = struct.unpack_from(fmt, blob, pos)
        pos += size
        return vals

    version, meta_len = take("<II")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    meta = json.loads(blob[pos:pos + meta_len].decode("utf-8"))
    pos += meta_len
    (count,) = take("<I")
    arrays = {}
    for _ in range(count):
        (name_len,) = take("<I")
        name = blob[pos:pos + name_len].decode("utf-8")
        pos += name_len
        (ndim,) = take("<I")
        shape = take(f"<{ndim}I")
        n = int(np.prod(shape, dtype=np.int64))
        if pos + 8 * n > len(blob):
            raise CheckpointError(f"truncated data for {name!r}")
        arrays[name] = np.frombuffer(blob, dtype="<f8", count=n, offset=pos).reshape(shape).astype(np.float64)
        pos += 8 * n
    if pos != len(blob):
        raise CheckpointError("trailing bytes after last entry")
    return arrays, meta


def save_checkpoint(path, arrays: Mapping[str, np.ndarray], meta: Optional[dict] = None) -> str:
    """Write the checkpoint and return its sha256 hex digest."""
    blob = encode_params(arrays, meta)
    Path(path).write_bytes(blob)
    return hashlib.sha256(blob).hexdigest()


def load_checkpoint(path) -> tuple[dict, dict]:
    return decode_params(Path(path).read_bytes())
