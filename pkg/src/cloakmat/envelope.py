"""Client/cloud exchange envelope.

Layout (little-endian)::

    b"TENV" | version u8 (=1) | tag u8 | count u32 | count x (length u64, MXB1 matrix)

Tags: 0x01/0x02/0x03 are multiplication/regression/eigen tasks; the same
values with the high bit set (0x81/0x82/0x83) are the matching results.
Envelopes carry ciphertext matrices only, never key material.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedHeaderError, ParameterError, TruncatedPayloadError, VersionMismatchError
from .matcore import from_mxb_bytes, to_mxb_bytes

MAGIC = b"TENV"
VERSION = 1
_HEAD = struct.Struct("<4sBBI")
_LEN = struct.Struct("<Q")

TAGS = {
    "mmc": 0x01, "lr": 0x02, "evd": 0x03,
    "mmc-result": 0x81, "lr-result": 0x82, "evd-result": 0x83,
}
TAG_NAMES = {v: k for k, v in TAGS.items()}
# matrices each envelope kind must carry, in order
EXPECTED_COUNT = {"mmc": 2, "lr": 2, "evd": 1, "mmc-result": 1, "lr-result": 1, "evd-result": 2}


@dataclass(frozen=True)
class TaskEnvelope:
    protocol: str
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.protocol not in TAGS:
            raise ParameterError(f"unknown envelope protocol {self.protocol!r}")
        if len(self.matrices) != EXPECTED_COUNT[self.protocol]:
            raise ParameterError(
                f"{self.protocol} envelope needs {EXPECTED_COUNT[self.protocol]} matrices, "
                f"got {len(self.matrices)}")


def envelope_bytes(env: TaskEnvelope) -> bytes:
    parts = [_HEAD.pack(MAGIC, VERSION, TAGS[env.protocol], len(env.matrices))]
    for mat in env.matrices:
        blob = to_mxb_bytes(mat)
        parts += [_LEN.pack(len(blob)), blob]
    return b"".join(parts)


def parse_envelope(buf: bytes) -> TaskEnvelope:
    if len(buf) < _HEAD.size:
        raise TruncatedPayloadError("envelope shorter than its header")
    magic, version, tag, count = _HEAD.unpack_from(buf)
    if magic != MAGIC:
        raise MalformedHeaderError(f"bad envelope magic {magic!r}")
    if version != VERSION:
        raise VersionMismatchError(f"envelope version {version}, expected {VERSION}")
    if tag not in TAG_NAMES:
        raise MalformedHeaderError(f"unknown protocol tag 0x{tag:02x}")
    protocol = TAG_NAMES[tag]
    if count != EXPECTED_COUNT[protocol]:
        raise MalformedHeaderError(f"{protocol} envelope declares {count} matrices")
    pos = _HEAD.size
    mats = []
    for _ in range(count):
        if pos + _LEN.size > len(buf):
            raise TruncatedPayloadError("envelope ends inside a length prefix")
        (size,) = _LEN.unpack_from(buf, pos)
        pos += _LEN.size
        if pos + size > len(buf):
            raise TruncatedPayloadError("envelope ends inside a matrix payload")
        mats.append(from_mxb_bytes(buf[pos:pos + size]))
        pos += size
    if pos != len(buf):
        raise MalformedHeaderError("trailing bytes after the last matrix")
    return TaskEnvelope(protocol, tuple(mats))


def write_envelope(env: TaskEnvelope, path) -> None:
    Path(path).write_bytes(envelope_bytes(env))


def read_envelope(path) -> TaskEnvelope:
    return parse_envelope(Path(path).read_bytes())
