"""Binary checkpoint format.

Layout (all little-endian):

    4s   magic "DPRF"
    u16  format version
    u16  SH convention version
    u32  number of points n
    u32  l_max
    u32  length of the config block in bytes
    ...  config block, UTF-8 "key=value" lines
    f32  positions, n * 3
    f32  SH coefficients, n * 3 * (l_max+1)^2
"""

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .scene import RadiancePointCloud
from .sh import SH_CONVENTION_VERSION, num_coeffs

MAGIC = b"DPRF"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHII")
_LEN = struct.Struct("<I")


@dataclass
class Checkpoint:
    positions: np.ndarray     # float32 (n, 3)
    sh_coeffs: np.ndarray     # float32 (n, 3, B)
    l_max: int
    config: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION
    sh_convention_version: int = SH_CONVENTION_VERSION

    def to_cloud(self):
        return RadiancePointCloud(self.positions.astype(np.float64),
                                  self.sh_coeffs.astype(np.float64), self.l_max)


def encode_config(config):
    lines = []
    for key, value in config.items():
        key, value = str(key), str(value)
        if "=" in key or "\n" in key or "\n" in value:
            raise CheckpointError(f"config entry {key!r} cannot be stored")
        lines.append(f"{key}={value}")
    return "\n".join(lines).encode("utf-8")


def decode_config(block):
    out = {}
    for line in block.decode("utf-8").splitlines():
        if line:
            key, _, value = line.partition("=")
            out[key] = value
    return out


def to_bytes(cloud, config=None):
    pos = np.ascontiguousarray(cloud.positions, dtype="<f4")
    coeffs = np.ascontiguousarray(cloud.sh_coeffs, dtype="<f4")
    block = encode_config(config or {})
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, SH_CONVENTION_VERSION, len(pos), cloud.l_max)
    return header + _LEN.pack(len(block)) + block + pos.tobytes() + coeffs.tobytes()


def save_checkpoint(cloud, path, config=None):
    data = to_bytes(cloud, config)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(data)
    return len(data)


def from_bytes(data):
    if len(data) < _HEADER.size + _LEN.size:
        raise CheckpointError("checkpoint truncated: header incomplete")
    magic, version, convention, n, l_max = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported format version {version}")
    if convention != SH_CONVENTION_VERSION:
        raise CheckpointError(f"unsupported SH convention version {convention}")
    if l_max > 4:
        raise CheckpointError(f"invalid l_max {l_max}")
    off = _HEADER.size
    (block_len,) = _LEN.unpack_from(data, off)
    off += _LEN.size
    n_coeff = n * 3 * num_coeffs(l_max)
    expected = off + block_len + 4 * (3 * n + n_coeff)
    if len(data) != expected:
        raise CheckpointError(f"checkpoint corrupt: expected {expected} bytes, found {len(data)}")
    try:
        config = decode_config(data[off:off + block_len])
    except UnicodeDecodeError as exc:
        raise CheckpointError("checkpoint corrupt: config block is not UTF-8") from exc
    off += block_len
    pos = np.frombuffer(data, dtype="<f4", count=3 * n, offset=off).reshape(n, 3).copy()
    off += 12 * n
    coeffs = np.frombuffer(data, dtype="<f4", count=n_coeff, offset=off)
    coeffs = coeffs.reshape(n, 3, num_coeffs(l_max)).copy()
    return Checkpoint(pos, coeffs, l_max, config, version, convention)


def load_checkpoint(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    return from_bytes(data)
