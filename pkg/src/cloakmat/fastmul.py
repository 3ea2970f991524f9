"""Structured products with key factors in O(rows * cols) time.

Every kernel takes a dense ``t`` and returns a fresh array; keys are never
expanded to dense form. ``side="left"`` computes ``K @ t`` and
``side="right"`` computes ``t @ K``. A 1-D ``t`` is treated as a column
vector on the left and a row vector on the right, and the result keeps
the input's dimensionality.
"""
from __future__ import annotations

import contextlib
import contextvars

import numba
import numpy as np

from .errors import IllConditionedKeyError, InvalidDimensionError, ParameterError
from .keyforge import RankOnePerturbation, ScaledPermutation, SecretMatrix

_counter: contextvars.ContextVar[list | None] = contextvars.ContextVar("fastmul_ops", default=None)


@contextlib.contextmanager
def count_multiplications():
    """Tally scalar multiplications and divisions done by the kernels.

    >>> with count_multiplications() as tally:
    ...     _ = apply_perm(key, t, "left")
    >>> tally[0]
    """
    tally = [0]
    token = _counter.set(tally)
    try:
        yield tally
    finally:
        _counter.reset(token)


def _tick(n: int) -> None:
    tally = _counter.get()
    if tally is not None:
        tally[0] += int(n)


def _as_2d(t, side: str):
    arr = np.asarray(t, dtype=np.float64)
    if side not in ("left", "right"):
        raise ParameterError(f"side must be 'left' or 'right', got {side!r}")
    if arr.ndim == 1:
        return (arr[:, None] if side == "left" else arr[None, :]), True
    if arr.ndim != 2:
        raise InvalidDimensionError(f"expected a vector or matrix, got shape {arr.shape}")
    return arr, False


def _restore(out: np.ndarray, was_vec: bool) -> np.ndarray:
    return out.reshape(-1) if was_vec else out


def _check_size(n: int, t: np.ndarray, side: str) -> None:
    k = t.shape[0] if side == "left" else t.shape[1]
    if k != n:
        raise InvalidDimensionError(f"key of size {n} does not conform to {t.shape} on the {side}")


@numba.njit(cache=True)
def _gather_rows(t, idx, w, div):
    # out[i, :] = t[idx[i], :] * w[i]   (or / w[i])
    m, n = t.shape
    out = np.empty((m, n))
    for i in range(m):
        src = idx[i]
        for j in range(n):
            out[i, j] = t[src, j] / w[i] if div else t[src, j] * w[i]
    return out


@numba.njit(cache=True)
def _gather_cols(t, idx, w, div):
    # out[:, j] = t[:, idx[j]] * w[j]   (or / w[j])
    m, n = t.shape
    out = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            out[i, j] = t[i, idx[j]] / w[j] if div else t[i, idx[j]] * w[j]
    return out


@numba.njit(cache=True)
def _add_outer(u, a, b, c):
    # u += c * a b^T, in place
    m, n = u.shape
    for i in range(m):
        ai = c * a[i]
        for j in range(n):
            u[i, j] += ai * b[j]


@numba.njit(cache=True)
def _sm_correct(u, a, b, p, denom, left):
    # u -= P^-1 [H u] / denom (left) or [u H] P^-1 / denom (right), where the
    # rank-one product is a b^T and p holds the matching P^-1 divisors
    m, n = u.shape
    for i in range(m):
        for j in range(n):
            if left:
                u[i, j] -= ((a[i] * b[j]) / p[i]) / denom
            else:
                u[i, j] -= ((a[i] * b[j]) / p[j]) / denom


def _perm_dense(p: ScaledPermutation, t2: np.ndarray, side: str, inverse: bool) -> np.ndarray:
    fwd, inv, sc = p.perm.forward, p.perm.inverse, p.scale
    if side == "left":
        if not inverse:   # (P T)(i, j) = p_i t[pi(i), j]
            return _gather_rows(t2, fwd, sc, False)
        # (P^-1 T)(i, j) = t[pi^-1(i), j] / p[pi^-1(i)]
        return _gather_rows(t2, inv, sc[inv], True)
    if not inverse:       # (T P)(i, j) = p[pi^-1(j)] t[i, pi^-1(j)]
        return _gather_cols(t2, inv, sc[inv], False)
    # (T P^-1)(i, j) = t[i, pi(j)] / p_j
    return _gather_cols(t2, fwd, sc, True)


def apply_perm(p: ScaledPermutation, t, side: str = "left", inverse: bool = False) -> np.ndarray:
    t2, vec = _as_2d(t, side)
    _check_size(p.n, t2, side)
    out = _perm_dense(p, t2, side, inverse)
    _tick(t2.size)
    return _restore(out, vec)


def apply_rank_one(h: RankOnePerturbation, t, side: str = "left") -> np.ndarray:
    t2, vec = _as_2d(t, side)
    _check_size(h.n, t2, side)
    if side == "left":
        # H T = h (1^T T): column sums, then an outer product
        out = np.outer(h.h, t2.sum(axis=0))
    else:
        # T H = (T h) 1^T
        out = np.repeat((t2 @ h.h)[:, None], h.n, axis=1)
    _tick(t2.size)
    return _restore(out, vec)


def apply_secret(m: SecretMatrix, t, side: str = "left", inverse: bool = False) -> np.ndarray:
    """Multiply by ``M`` or ``M^-1`` using the Sherman-Morrison form of the inverse.

    ``M^-1 T = P^-1 T - P^-1 [H (P^-1 T)] / (1 + tr(H P^-1))``, and the
    mirrored chain on the right.
    """
    t2, vec = _as_2d(t, side)
    _check_size(m.n, t2, side)
    h = m.h.h
    t2 = np.ascontiguousarray(t2)
    if not inverse:
        # P T + h (1^T T)  or  T P + (T h) 1^T
        out = _perm_dense(m.p, t2, side, False)
        if side == "left":
            _add_outer(out, h, t2.sum(axis=0), 1.0)
        else:
            _add_outer(out, t2 @ h, np.ones(m.n), 1.0)
        _tick(2 * t2.size)
        return _restore(out, vec)
    if not m.is_well_conditioned:
        raise IllConditionedKeyError(
            f"invertibility margin {m.margin:.3g} below {m.min_margin:.3g}")
    denom = 1.0 + m.trace_sum
    u = _perm_dense(m.p, t2, side, True)
    inv, sc = m.p.perm.inverse, m.p.scale
    if side == "left":
        # row i of P^-1 (h c^T) is h[pi^-1(i)] c^T / p[pi^-1(i)], c = 1^T u
        _sm_correct(u, h[inv], u.sum(axis=0), sc[inv], denom, True)
    else:
        # column j of (w 1^T) P^-1 is w / p_j, w = u h
        _sm_correct(u, u @ h, np.ones(m.n), sc, denom, False)
    _tick(4 * t2.size)
    return _restore(u, vec)
