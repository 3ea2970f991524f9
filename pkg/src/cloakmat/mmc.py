"""Outsourced matrix multiplication: encrypt on the client, multiply in the
cloud, decrypt and Freivalds-check back on the client.

Two schemes share the task/result types: the masked scheme keyed by
``MmcKey`` (``M = P + H`` factors) and the permutation-only baseline keyed
by ``LeiKey``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, ParameterError
from .fastmul import apply_perm, apply_secret
from .keyforge import LeiKey, MmcKey
from .matcore import as_matrix, mat_mul_naive, max_abs

VERIFY_TOL = 1e-7


@dataclass(frozen=True)
class MmcTask:
    """What the cloud receives: two ciphertext matrices and nothing else."""

    x_enc: np.ndarray
    y_enc: np.ndarray

    def __post_init__(self):
        if self.x_enc.ndim != 2 or self.y_enc.ndim != 2 or self.x_enc.shape[1] != self.y_enc.shape[0]:
            raise InvalidDimensionError(f"task shapes {self.x_enc.shape} and {self.y_enc.shape} do not chain")


@dataclass(frozen=True)
class MmcResult:
    z_enc: np.ndarray


def _check_key_dims(sizes, x: np.ndarray, y: np.ndarray) -> None:
    m, n, s = sizes
    if x.shape != (m, n) or y.shape != (n, s):
        raise InvalidDimensionError(f"key sizes {sizes} do not match X{x.shape}, Y{y.shape}")


def mmc_encrypt(key: MmcKey, x, y) -> MmcTask:
    """``X' = M1 X M2^-1`` and ``Y' = M2 Y M3^-1``."""
    x, y = as_matrix(x, "x"), as_matrix(y, "y")
    _check_key_dims((key.m1.n, key.m2.n, key.m3.n), x, y)
    x_enc = apply_secret(key.m2, apply_secret(key.m1, x, "left"), "right", inverse=True)
    y_enc = apply_secret(key.m3, apply_secret(key.m2, y, "left"), "right", inverse=True)
    return MmcTask(x_enc, y_enc)


def cloud_mmc(task: MmcTask, method: str = "naive") -> MmcResult:
    """The cloud's whole job. It sees ciphertexts only; no key is passed in.

    ``method="naive"`` runs the reference triple loop, ``"blas"`` uses numpy.
    """
    if task.x_enc.shape[1] != task.y_enc.shape[0]:
        raise InvalidDimensionError("task matrices do not chain")
    if method == "naive":
        return MmcResult(mat_mul_naive(task.x_enc, task.y_enc))
    if method == "blas":
        return MmcResult(task.x_enc @ task.y_enc)
    raise ParameterError(f"unknown multiplication method {method!r}")


def mmc_decrypt(key: MmcKey, res: MmcResult) -> np.ndarray:
    """``Z = M1^-1 Z' M3``."""
    z = as_matrix(res.z_enc, "z_enc")
    if z.shape != (key.m1.n, key.m3.n):
        raise InvalidDimensionError(f"result {z.shape} does not match key ({key.m1.n}, {key.m3.n})")
    return apply_secret(key.m3, apply_secret(key.m1, z, "left", inverse=True), "right")


def lei_encrypt(key: LeiKey, x, y) -> MmcTask:
    """Baseline ``X' = P1 X P2^-1``, ``Y' = P2 Y P3^-1``."""
    x, y = as_matrix(x, "x"), as_matrix(y, "y")
    _check_key_dims((key.p1.n, key.p2.n, key.p3.n), x, y)
    x_enc = apply_perm(key.p2, apply_perm(key.p1, x, "left"), "right", inverse=True)
    y_enc = apply_perm(key.p3, apply_perm(key.p2, y, "left"), "right", inverse=True)
    return MmcTask(x_enc, y_enc)


def lei_decrypt(key: LeiKey, res: MmcResult) -> np.ndarray:
    z = as_matrix(res.z_enc, "z_enc")
    if z.shape != (key.p1.n, key.p3.n):
        raise InvalidDimensionError(f"result {z.shape} does not match key ({key.p1.n}, {key.p3.n})")
    return apply_perm(key.p3, apply_perm(key.p1, z, "left", inverse=True), "right")


def random_bits(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform 0/1 vector, redrawn while all-zero (an empty check proves nothing)."""
    while True:
        r = rng.integers(0, 2, n).astype(np.float64)
        if r.any():
            return r


def mmc_verify(x, y, z, loops: int, rng: np.random.Generator, tol: float = VERIFY_TOL) -> bool:
    """Freivalds check of ``Z == X Y`` with ``loops`` independent 0/1 vectors.

    Loop ``k`` tests ``X (Y r) - Z r`` against ``tol * max|X| * max|Y| * n``;
    a wrong ``Z`` survives one loop with probability at most 1/2.
    """
    if loops < 1:
        raise ParameterError("loops must be at least 1")
    x, y, z = as_matrix(x, "x"), as_matrix(y, "y"), as_matrix(z, "z")
    if x.shape[1] != y.shape[0] or z.shape != (x.shape[0], y.shape[1]):
        raise InvalidDimensionError(f"shapes X{x.shape} Y{y.shape} Z{z.shape} do not conform")
    bound = tol * max_abs(x) * max_abs(y) * x.shape[1]
    # all loops at once: column k of R is the k-th independent 0/1 vector
    r = np.column_stack([random_bits(y.shape[1], rng) for _ in range(loops)])
    resid = x @ (y @ r) - z @ r
    return bool(np.all(np.max(np.abs(resid), axis=0) <= bound))


def mmc_verify_transcript(task: MmcTask, res: MmcResult, loops: int, rng: np.random.Generator) -> bool:
    """Freivalds check of the cloud's own product ``Z' == X' Y'``.

    Decryption is exact algebra the client runs itself, so checking the
    masked triple certifies the decrypted ``Z`` as well. The tolerance is a
    row-wise rounding bound, not a fixed relative threshold: row ``i`` of
    ``X'(Y'r) - Z'r`` may deviate by at most
    ``gamma * (rowsum|X'_i| * max|Y'| * sum(r) + rowsum|Z'_i|)`` with
    ``gamma = 2 (2n + s + 2) u``, which dominates the worst-case error of an
    honest ``n``-term product plus the two checking products. Unlike the
    plaintext check this stays complete at any size; the plaintext bound is
    eventually exceeded by honest results because decryption amplifies the
    cloud's rounding.
    """
    if loops < 1:
        raise ParameterError("loops must be at least 1")
    x, y = as_matrix(task.x_enc, "x_enc"), as_matrix(task.y_enc, "y_enc")
    z = np.asarray(res.z_enc, dtype=np.float64)
    if x.shape[1] != y.shape[0] or z.shape != (x.shape[0], y.shape[1]):
        raise InvalidDimensionError(f"shapes X'{x.shape} Y'{y.shape} Z'{z.shape} do not conform")
    n, s = y.shape
    gamma = (2 * n + s + 2) * np.finfo(np.float64).eps  # eps = 2u
    r = np.column_stack([random_bits(s, rng) for _ in range(loops)])
    # NaN or Inf anywhere in a forged Z' makes a comparison false, so it rejects
    with np.errstate(invalid="ignore", over="ignore"):
        resid = np.abs(x @ (y @ r) - z @ r)
        bound = gamma * (np.abs(x).sum(axis=1)[:, None] * max_abs(y) * r.sum(axis=0)[None, :]
                         + np.abs(z).sum(axis=1)[:, None])
        return bool(np.all(resid <= bound))
