import struct

import numpy as np
import pytest

from pointrf.checkpoint import (from_bytes, load_checkpoint, save_checkpoint, to_bytes)
from pointrf.config import snapshot
from pointrf.errors import CheckpointError
from pointrf.render import RasterConfig
from pointrf.scene import RadiancePointCloud
from pointrf.train import TrainConfig


def cloud32(n=50, l_max=2, seed=0):
    c = RadiancePointCloud.random_appearance(np.random.default_rng(seed).normal(size=(n, 3)), l_max, seed)
    c.positions = c.positions.astype(np.float32).astype(np.float64)
    c.sh_coeffs = c.sh_coeffs.astype(np.float32).astype(np.float64)
    return c


def test_roundtrip_bit_identical(tmp_path):
    c = cloud32()
    cfg = snapshot(TrainConfig(), RasterConfig())
    save_checkpoint(c, tmp_path / "m.dprf", cfg)
    ck = load_checkpoint(tmp_path / "m.dprf")
    assert ck.positions.dtype == np.float32
    assert np.array_equal(ck.positions, c.positions.astype(np.float32))
    assert np.array_equal(ck.sh_coeffs, c.sh_coeffs.astype(np.float32))
    assert ck.config == cfg
    assert to_bytes(ck.to_cloud(), ck.config) == (tmp_path / "m.dprf").read_bytes()


def test_header_layout():
    data = to_bytes(cloud32(7, 1), {"a": "1"})
    magic, ver, conv, n, l_max = struct.unpack_from("<4sHHII", data)
    assert (magic, ver, conv, n, l_max) == (b"DPRF", 1, 1, 7, 1)
    (blen,) = struct.unpack_from("<I", data, 16)
    assert data[20:20 + blen] == b"a=1"
    assert len(data) == 20 + blen + 7 * (3 + 12) * 4
    pos = np.frombuffer(data, "<f4", 21, 20 + blen).reshape(7, 3)
    assert np.array_equal(pos, cloud32(7, 1).positions.astype(np.float32))


def test_truncated_file_rejected():
    data = to_bytes(cloud32())
    for cut in (3, 17, len(data) - 1):
        with pytest.raises(CheckpointError):
            from_bytes(data[:cut])


def test_wrong_magic_and_version():
    data = bytearray(to_bytes(cloud32()))
    bad = bytes(b"XPRF" + data[4:])
    with pytest.raises(CheckpointError, match="magic"):
        from_bytes(bad)
    data[4:6] = struct.pack("<H", 9)
    with pytest.raises(CheckpointError, match="version"):
        from_bytes(bytes(data))


def test_unstorable_config():
    with pytest.raises(CheckpointError):
        to_bytes(cloud32(), {"a": "x\ny"})


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.dprf")


def test_size_formula(tmp_path):
    n = 45_000
    c = RadiancePointCloud(np.zeros((n, 3)), np.zeros((n, 3, 9)), 2)
    cfg = snapshot(TrainConfig(), RasterConfig())
    size = save_checkpoint(c, tmp_path / "big.dprf", cfg)
    block = len("\n".join(f"{k}={v}" for k, v in cfg.items()).encode())
    assert size == 16 + 4 + block + n * 30 * 4
