"""Outsourced least-squares regression under a row-sign and ``M`` mask.

The client centres the data, sends ``X' = A X M`` and ``Y' = A (Y + X R)``
with ``A = diag(+-k)``; the cloud solves the normal equations and returns
``beta' = M^-1 (beta + R)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, SingularDesignError, UnderdeterminedDesignError
from .fastmul import apply_secret
from .keyforge import LrKey
from .matcore import as_matrix, max_abs

VERIFY_TOL = 1e-7
PIVOT_TOL = 1e-12
REFINE_STEPS = 2


@dataclass(frozen=True)
class CenteredDesign:
    x_centered: np.ndarray
    y_centered: np.ndarray
    x_mean: np.ndarray
    y_mean: float


@dataclass(frozen=True)
class LrSolution:
    beta: np.ndarray
    beta0: float


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDimensionError(f"{name} must be a non-empty vector")
    return arr


def lr_center(x, y) -> CenteredDesign:
    x = as_matrix(x, "x")
    y = _as_vector(y, "y")
    m, n = x.shape
    if len(y) != m:
        raise InvalidDimensionError(f"y has {len(y)} entries, x has {m} rows")
    if m <= n:
        raise UnderdeterminedDesignError(f"need more rows than columns, got {m}x{n}")
    x_mean = x.mean(axis=0)
    y_mean = float(y.mean())
    return CenteredDesign(x - x_mean, y - y_mean, x_mean, y_mean)


def lr_encrypt(key: LrKey, d: CenteredDesign) -> tuple[np.ndarray, np.ndarray]:
    m, n = d.x_centered.shape
    if len(key.signs) != m or key.m_key.n != n:
        raise InvalidDimensionError(f"key sizes ({len(key.signs)}, {key.m_key.n}) do not match design {m}x{n}")
    a = key.diag
    x_enc = a[:, None] * apply_secret(key.m_key, d.x_centered, "right")
    y_enc = a * (d.y_centered + d.x_centered @ key.r_vec)
    return x_enc, y_enc


def cholesky_factor(g: np.ndarray) -> np.ndarray:
    """Lower factor ``L`` of ``G = L L^T``.

    Raises ``SingularDesignError`` when a pivot falls below
    ``1e-12 * trace(G) / n``.
    """
    n = g.shape[0]
    floor = PIVOT_TOL * np.trace(g) / n
    low = np.zeros_like(g)
    for j in range(n):
        piv = g[j, j] - low[j, :j] @ low[j, :j]
        if not piv > floor:
            raise SingularDesignError(f"Gram matrix pivot {piv:.3g} at column {j} below {floor:.3g}")
        low[j, j] = np.sqrt(piv)
        low[j + 1:, j] = (g[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def cholesky_solve(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = low.shape[0]
    z = np.empty(n)
    for i in range(n):
        z[i] = (b[i] - low[i, :i] @ z[:i]) / low[i, i]
    out = np.empty(n)
    for i in range(n - 1, -1, -1):
        out[i] = (z[i] - low[i + 1:, i] @ out[i + 1:]) / low[i, i]
    return out


def least_squares(x, y, refine: int = REFINE_STEPS) -> np.ndarray:
    """Normal-equations solve ``(X^T X)^-1 X^T y``; also the plaintext baseline.

    After the Cholesky solve, ``refine`` correction steps reuse the factor
    on the true residual ``X^T (y - X b)``. The masked Gram matrix carries
    ``cond(M)**2``, and without this the answer drifts by ~1e-5.
    """
    x = as_matrix(x, "x")
    y = _as_vector(y, "y")
    if len(y) != x.shape[0]:
        raise InvalidDimensionError("x and y row counts differ")
    low = cholesky_factor(x.T @ x)
    b = cholesky_solve(low, x.T @ y)
    for _ in range(refine):
        b = b + cholesky_solve(low, x.T @ (y - x @ b))
    return b


def cloud_lr(x_enc, y_enc) -> np.ndarray:
    return least_squares(x_enc, y_enc)


def lr_verify(x_enc, y_enc, beta_enc, tol: float = VERIFY_TOL) -> bool:
    """Accept iff ``X'^T (X' beta' - Y')`` vanishes to ``tol`` relative scale."""
    x = as_matrix(x_enc, "x_enc")
    y = _as_vector(y_enc, "y_enc")
    b = _as_vector(beta_enc, "beta_enc")
    m, n = x.shape
    if len(y) != m or len(b) != n:
        raise InvalidDimensionError("verification operands do not conform")
    resid = x.T @ (x @ b - y)
    bound = tol * max_abs(x) ** 2 * max_abs(b) * m
    return bool(np.max(np.abs(resid)) <= bound)


def lr_decrypt(key: LrKey, beta_enc, d: CenteredDesign) -> LrSolution:
    b = _as_vector(beta_enc, "beta_enc")
    if len(b) != key.m_key.n or len(d.x_mean) != key.m_key.n:
        raise InvalidDimensionError("beta' size does not match the key")
    beta = apply_secret(key.m_key, b, "left") - key.r_vec
    return LrSolution(beta, d.y_mean - float(d.x_mean @ beta))
