"""Binary field snapshots: header + little-endian float64 array.

Layout: 8-byte magic, uint32 version, uint32 JSON header length, the JSON
header (grid descriptor + config hash), then the raw little-endian array.
Used by the on-disk solution cache.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"FSRFFLD\x00"
VERSION = 1


class SnapshotError(RuntimeError):
    """Malformed or incompatible snapshot bytes."""


def pack_field(values: np.ndarray, grid_descriptor: dict, config_hash: str) -> bytes:
    """Serialize one float64 array with its grid descriptor and config hash."""
    arr = np.ascontiguousarray(values, dtype="<f8")
    header = json.dumps(
        {
            "grid": grid_descriptor,
            "config_hash": config_hash,
            "shape": list(arr.shape),
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode()
    return b"".join(
        [MAGIC, struct.pack("<II", VERSION, len(header)), header, arr.tobytes()]
    )


def unpack_field(blob: bytes):
    """Inverse of pack_field: returns (values, grid_descriptor, config_hash)."""
    if blob[:8] != MAGIC:
        raise SnapshotError("bad magic")
    version, hlen = struct.unpack_from("<II", blob, 8)
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    header_bytes = blob[16: 16 + hlen]
    try:
        header = json.loads(header_bytes.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"corrupt header: {exc}") from exc
    payload = blob[16 + hlen:]
    shape = tuple(header["shape"])
    expected = int(np.prod(shape)) * 8
    if len(payload) != expected:
        raise SnapshotError(
            f"payload length {len(payload)} does not match shape {shape}"
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(shape)
    return values, header["grid"], header["config_hash"]
