"""Timing runner for the client speedup and cloud efficiency indicators.

``t_o`` is the plaintext solve on the same inputs, ``t_cs`` the cloud's
solve on ciphertext, ``t_c1`` key generation plus encryption and ``t_c2``
verification plus decryption. Times are wall-clock milliseconds from a
monotonic clock, averaged over repetitions.

Inputs are drawn uniformly from [-1, 1]. Regression designs get a planted
coefficient vector plus small noise; eigen tasks use ``D D^T`` for a random
``n x 2n`` dataset ``D``.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, ParameterError, VerificationError
from .keyforge import DEFAULT_KAPPA, keygen_evd, keygen_lr, keygen_mmc
from .matcore import mat_mul_naive
from .mmc import MmcTask, cloud_mmc, mmc_decrypt, mmc_encrypt, mmc_verify_transcript
from .regress import cloud_lr, least_squares, lr_center, lr_decrypt, lr_encrypt, lr_verify
from .spectra import cloud_evd, evd_decrypt, evd_encrypt, evd_verify

CSV_HEADER = ("protocol", "dims", "loops", "t_o", "t_cs", "t_c1", "t_c2", "i_c", "i_cs", "i_ec")
PROTOCOL_DIMS = {"mmc": 3, "lr": 2, "evd": 1}
DEFAULT_LADDER = ((128, 160, 192), (256, 320, 384), (512, 640, 768))


@dataclass(frozen=True)
class BenchRow:
    protocol: str
    dims: tuple[int, ...]
    loops: int
    t_o: float
    t_cs: float
    t_c1: float
    t_c2: float

    def __post_init__(self):
        if min(self.t_o, self.t_cs, self.t_c1, self.t_c2) < 0:
            raise ParameterError("timings must be non-negative")

    @property
    def t_c(self) -> float:
        return self.t_c1 + self.t_c2

    @property
    def i_c(self) -> float:
        return self.t_o / self.t_c

    @property
    def i_cs(self) -> float:
        return self.t_o / self.t_cs

    @property
    def i_ec(self) -> float:
        return (self.t_c + self.t_cs - self.t_o) / self.t_o

    def csv_fields(self) -> list[str]:
        return [self.protocol, "x".join(map(str, self.dims)), str(self.loops),
                *(f"{v:.6g}" for v in (self.t_o, self.t_cs, self.t_c1, self.t_c2,
                                        self.i_c, self.i_cs, self.i_ec))]


def rows_to_csv(rows, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(row.csv_fields())
    return buf.getvalue()


def _ms(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, (time.perf_counter() - t0) * 1e3


def _check(ok: bool, what: str) -> None:
    if not ok:
        raise VerificationError(f"{what} result failed verification during benchmarking")


def _mmc_once(dims, loops, rng, kappa):
    m, n, s = dims
    x = rng.uniform(-1, 1, (m, n))
    y = rng.uniform(-1, 1, (n, s))
    # plaintext and ciphertext products read from the same two buffers so
    # allocator placement cannot favour either side (copies are untimed)
    a_buf, b_buf = x.copy(), y.copy()
    _, t_o = _ms(lambda: mat_mul_naive(a_buf, b_buf))
    (key, task), t_c1 = _ms(lambda: (k := keygen_mmc(m, n, s, kappa, rng), mmc_encrypt(k, x, y)))
    a_buf[...], b_buf[...] = task.x_enc, task.y_enc
    res, t_cs = _ms(lambda: cloud_mmc(MmcTask(a_buf, b_buf)))

    def finish():
        z = mmc_decrypt(key, res)
        _check(mmc_verify_transcript(task, res, loops, rng), "multiplication")
    _, t_c2 = _ms(finish)
    return t_o, t_cs, t_c1, t_c2


def _lr_once(dims, loops, rng, kappa):
    m, n = dims
    x = rng.uniform(-1, 1, (m, n))
    y = x @ rng.uniform(-1, 1, n) + 0.5 + 1e-3 * rng.standard_normal(m)

    def plain():
        d = lr_center(x, y)
        return least_squares(d.x_centered, d.y_centered)
    _, t_o = _ms(plain)

    def start():
        key = keygen_lr(m, n, kappa, rng)
        d = lr_center(x, y)
        return key, d, lr_encrypt(key, d)
    (key, d, (xe, ye)), t_c1 = _ms(start)
    be, t_cs = _ms(lambda: cloud_lr(xe, ye))

    def finish():
        _check(lr_verify(xe, ye, be), "regression")
        return lr_decrypt(key, be, d)
    _, t_c2 = _ms(finish)
    return t_o, t_cs, t_c1, t_c2


def _evd_once(dims, loops, rng, kappa):
    (n,) = dims
    data = rng.uniform(-1, 1, (n, 2 * n))
    a = data @ data.T
    _, t_o = _ms(lambda: cloud_evd(a))
    (key, b), t_c1 = _ms(lambda: (k := keygen_evd(n, kappa, rng), evd_encrypt(k, a)))
    spec, t_cs = _ms(lambda: cloud_evd(b))

    def finish():
        _check(evd_verify(b, spec, loops, rng), "eigen")
        return evd_decrypt(key, spec)
    _, t_c2 = _ms(finish)
    return t_o, t_cs, t_c1, t_c2


_RUNNERS = {"mmc": _mmc_once, "lr": _lr_once, "evd": _evd_once}


def bench_run(protocol: str, dims, loops: int, repetitions: int, rng: np.random.Generator,
              kappa: int = DEFAULT_KAPPA) -> BenchRow:
    """Time one protocol at ``dims`` and average the phases over ``repetitions``.

    ``dims`` is ``(m, n, s)`` for mmc, ``(m, n)`` for lr and ``(n,)`` for evd.
    A small warm-up run first triggers JIT compilation so it is not timed.
    """
    if protocol not in _RUNNERS:
        raise ParameterError(f"protocol must be one of {sorted(_RUNNERS)}, got {protocol!r}")
    dims = tuple(int(d) for d in dims)
    if len(dims) != PROTOCOL_DIMS[protocol] or min(dims) < 1:
        raise InvalidDimensionError(f"{protocol} needs {PROTOCOL_DIMS[protocol]} positive dims, got {dims}")
    if protocol == "lr" and dims[0] <= dims[1]:
        raise InvalidDimensionError("regression needs more rows than columns")
    if repetitions < 3:
        raise ParameterError("repetitions must be at least 3")
    if loops < 1:
        raise ParameterError("loops must be at least 1")
    runner = _RUNNERS[protocol]
    runner({"mmc": (4, 5, 6), "lr": (8, 3), "evd": (4,)}[protocol], loops, np.random.default_rng(0), kappa)
    times = np.array([runner(dims, loops, rng, kappa) for _ in range(repetitions)])
    t_o, t_cs, t_c1, t_c2 = (float(v) for v in times.mean(axis=0))
    return BenchRow(protocol, dims, loops, t_o, t_cs, t_c1, t_c2)
