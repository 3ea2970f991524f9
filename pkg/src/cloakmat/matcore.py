"""Dense matrix plumbing: validation, seeded randomness, permutations,
the reference triple-loop product and the on-disk matrix formats.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Vectors are
accepted where noted and treated as a single column.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from .errors import (
    InvalidDimensionError,
    MalformedHeaderError,
    MalformedValueError,
    NonFiniteValueError,
    ParameterError,
    TruncatedPayloadError,
)

MAX_ELEMENTS = 2**31
MXB_MAGIC = b"MXB1"
_MXB_HEADER = struct.Struct("<4sQQ")


def as_matrix(a, name: str = "matrix", *, finite: bool = True) -> np.ndarray:
    """Coerce ``a`` to a 2-D float64 array, rejecting empty or oversized input."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidDimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidDimensionError(f"{name} has an empty dimension {arr.shape}")
    if arr.size > MAX_ELEMENTS:
        raise InvalidDimensionError(f"{name} exceeds {MAX_ELEMENTS} elements")
    if finite and not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains NaN or Inf")
    return arr


def max_abs(a: np.ndarray) -> float:
    """Largest absolute entry; the norm used for every relative tolerance."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def make_rng(seed: int | None = None) -> np.random.Generator:
    """Seeded generator (PCG64, 128-bit state). The same seed always gives
    the same stream for a given numpy version."""
    if seed is not None and not 0 <= seed < 2**64:
        raise ParameterError("seed must fit in 64 unsigned bits")
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``range(n)``. ``forward[i]`` is the image of ``i``."""

    forward: np.ndarray
    inverse: np.ndarray

    def __post_init__(self):
        n = len(self.forward)
        if n == 0 or len(self.inverse) != n:
            raise InvalidDimensionError("permutation arrays must be non-empty and equal length")
        if not np.array_equal(np.sort(self.forward), np.arange(n)):
            raise ParameterError("forward is not a bijection on [0, n)")
        if not np.array_equal(self.inverse[self.forward], np.arange(n)):
            raise ParameterError("inverse does not undo forward")
        self.forward.setflags(write=False)
        self.inverse.setflags(write=False)

    @classmethod
    def from_forward(cls, forward) -> "Permutation":
        fwd = np.array(forward, dtype=np.int64)
        inv = np.empty_like(fwd)
        inv[fwd] = np.arange(len(fwd))
        return cls(fwd, inv)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls.from_forward(np.arange(n))

    def __len__(self) -> int:
        return len(self.forward)


def gen_permutation(n: int, rng: np.random.Generator) -> Permutation:
    """Uniform random permutation of ``range(n)`` by the Fisher-Yates shuffle."""
    if n < 1:
        raise InvalidDimensionError("permutation size must be at least 1")
    s = np.arange(n, dtype=np.int64)
    # one draw per position, all at once; j_i uniform on [0, i]
    js = rng.integers(0, np.arange(1, n + 1))
    for i in range(1, n):
        j = js[i]
        s[i], s[j] = s[j], s[i]
    return Permutation.from_forward(s)


@numba.njit(cache=True)
def _triple_loop(a, b):
    m, n = a.shape
    s = b.shape[1]
    out = np.zeros((m, s))
    # i-k-j order: every out[i, j] still accumulates k = 0..n-1 in sequence
    for i in range(m):
        for k in range(n):
            aik = a[i, k]
            for j in range(s):
                out[i, j] += aik * b[k, j]
    return out


def mat_mul_naive(a, b) -> np.ndarray:
    """Plain triple-loop product, sequential with a fixed summation order.

    This is the reference every structured kernel is checked against, and
    the workload the benchmark treats as "the original task".
    """
    a = as_matrix(a, "a", finite=False)
    b = as_matrix(b, "b", finite=False)
    if a.shape[1] != b.shape[0]:
        raise InvalidDimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return _triple_loop(np.ascontiguousarray(a), np.ascontiguousarray(b))


# --- file formats -----------------------------------------------------------

def to_mxb_bytes(a) -> bytes:
    a = as_matrix(a)
    rows, cols = a.shape
    return _MXB_HEADER.pack(MXB_MAGIC, rows, cols) + a.astype("<f8").tobytes(order="C")


def from_mxb_bytes(buf: bytes) -> np.ndarray:
    if len(buf) < _MXB_HEADER.size:
        raise MalformedHeaderError("buffer shorter than the MXB1 header")
    magic, rows, cols = _MXB_HEADER.unpack_from(buf)
    if magic != MXB_MAGIC:
        raise MalformedHeaderError(f"bad magic {magic!r}")
    if rows == 0 or cols == 0 or rows * cols > MAX_ELEMENTS:
        raise MalformedHeaderError(f"unsupported dimensions {rows}x{cols}")
    expected = _MXB_HEADER.size + 8 * rows * cols
    if len(buf) < expected:
        raise TruncatedPayloadError(
            f"header declares {rows}x{cols} but payload holds {(len(buf) - _MXB_HEADER.size) // 8} values")
    if len(buf) > expected:
        raise MalformedHeaderError("trailing bytes after the declared payload")
    data = np.frombuffer(buf, dtype="<f8", count=rows * cols, offset=_MXB_HEADER.size)
    if not np.all(np.isfinite(data)):
        raise NonFiniteValueError("payload contains NaN or Inf")
    return data.astype(np.float64).reshape(rows, cols)


def format_text(a) -> str:
    a = as_matrix(a)
    return "\n".join(",".join(f"{v:.17g}" for v in row) for row in a) + "\n"


def parse_text(text: str) -> np.ndarray:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if not lines or not lines[0]:
        raise MalformedValueError("empty matrix text")
    rows = []
    for lineno, ln in enumerate(lines, 1):
        try:
            rows.append([float(tok) for tok in ln.split(",")])
        except ValueError as exc:
            raise MalformedValueError(f"line {lineno}: {exc}") from None
    width = len(rows[0])
    for lineno, row in enumerate(rows, 1):
        if len(row) != width:
            raise TruncatedPayloadError(f"line {lineno} has {len(row)} values, expected {width}")
    arr = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError("text contains NaN or Inf")
    return arr


def _resolve_format(path: Path, fmt: str | None) -> str:
    if fmt is None:
        fmt = "binary" if path.suffix == ".mxb" else "text"
    if fmt not in ("binary", "text"):
        raise ParameterError(f"unknown matrix format {fmt!r}")
    return fmt


def write_matrix(path, a, fmt: str | None = None) -> None:
    """Write ``a`` as ``.mxb`` binary or comma-separated text.

    Without ``fmt`` the format follows the suffix: ``.mxb`` is binary,
    anything else is text.
    """
    path = Path(path)
    if _resolve_format(path, fmt) == "binary":
        path.write_bytes(to_mxb_bytes(a))
    else:
        path.write_text(format_text(a))


def read_matrix(path, fmt: str | None = None) -> np.ndarray:
    path = Path(path)
    if _resolve_format(path, fmt) == "binary":
        return from_mxb_bytes(path.read_bytes())
    return parse_text(path.read_text())
