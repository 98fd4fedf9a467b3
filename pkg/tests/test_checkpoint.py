import struct

import numpy as np
import pytest

from ghartree.checkpoint import MAGIC, read_checkpoint, sidecar_path, write_checkpoint
from ghartree.errors import CheckpointError
from ghartree.grid import ComplexField, Grid


def test_roundtrip(tmp_path):
    g = Grid(2, 8, 1.5)
    rng = np.random.default_rng(0)
    u = ComplexField(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    p = write_checkpoint(tmp_path / "f.ghfd", u, {"time": 0.25})
    raw = p.read_bytes()
    assert raw[:4] == MAGIC
    assert struct.unpack_from("<IIId", raw, 4) == (1, 2, 8, 1.5)
    v, meta = read_checkpoint(p)
    assert v.grid == g and np.array_equal(v.values, u.values)
    assert meta == {"time": 0.25}
    assert sidecar_path(p).name == "f.ghfd.json"


def test_corrupt(tmp_path):
    p = tmp_path / "x.ghfd"
    p.write_bytes(b"NOPE" + bytes(40))
    with pytest.raises(CheckpointError):
        read_checkpoint(p)
    u = ComplexField.zeros(Grid(2, 8, 1.0))
    write_checkpoint(p, u)
    p.write_bytes(p.read_bytes()[:-16])
    with pytest.raises(CheckpointError):
        read_checkpoint(p)
    with pytest.raises(CheckpointError):
        read_checkpoint(tmp_path / "missing.ghfd")
