"""Binary field checkpoints ("GHFD") with a JSON sidecar.

Layout, all little-endian::

    4s   magic b"GHFD"
    u32  format version
    u32  N
    u32  n
    f64  L
    n^N pairs of f64 (real, imag), C order

Time, parameters and any diagnostics live in ``<path>.json``.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .grid import ComplexField, Grid

MAGIC = b"GHFD"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_checkpoint(path, u: ComplexField, meta: dict | None = None) -> Path:
    path = Path(path)
    g = u.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, g.N, g.n, g.L))
        fh.write(u.values.astype("<c16", copy=False).tobytes(order="C"))
    with open(sidecar_path(path), "w") as fh:
        json.dump(meta or {}, fh, indent=2, sort_keys=True)
    return path


def read_checkpoint(path) -> tuple:
    """Return ``(field, meta)``; ``meta`` is ``{}`` when no sidecar exists."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise CheckpointError("checkpoint shorter than its header")
    magic, version, N, n, L = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    grid = Grid(N, n, L)
    body = raw[_HEADER.size:]
    if len(body) != 16 * n**N:
        raise CheckpointError(f"payload has {len(body)} bytes, expected {16 * n ** N}")
    vals = np.frombuffer(body, dtype="<c16").reshape(grid.shape)
    side = sidecar_path(path)
    meta = json.loads(side.read_text()) if side.exists() else {}
    return ComplexField(grid, vals.astype(np.complex128)), meta
