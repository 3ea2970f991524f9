"""General real eigensolver used by the cloud.

The masked covariance ``B = M A' M^-1`` is not symmetric, so the cloud
cannot use a symmetric solver. This reduces ``B`` to upper Hessenberg form,
finds the eigenvalues with Francis double-shift QR, then recovers each
eigenvector by inverse iteration on the Hessenberg matrix.
"""
from __future__ import annotations

import numba
import numpy as np

from .errors import ConvergenceError, InvalidDimensionError, SpectrumAssumptionError

IMAG_TOL = 1e-7
CLUSTER_TOL = 1e-8
INVERSE_ITERATIONS = 3
MAX_SWEEPS_PER_N = 100


def hessenberg(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction ``B = Q H Q^T`` with ``H`` upper Hessenberg."""
    h = np.array(b, dtype=np.float64)
    n = h.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h, q


@numba.njit(cache=True)
def _hqr(hin, max_sweeps):
    # Francis double-shift QR on an upper Hessenberg matrix, eigenvalues only.
    # Works on a 1-based copy; returns (wr, wi, sweeps) or sweeps = -1 on failure.
    n = hin.shape[0]
    a = np.zeros((n + 1, n + 1))
    a[1:, 1:] = hin
    wr = np.zeros(n + 1)
    wi = np.zeros(n + 1)
    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += abs(a[i, j])
    nn = n
    t = 0.0
    sweeps = 0
    x = y = z = w = p = q = r = s = 0.0
    while nn >= 1:
        its = 0
        while True:
            l = nn
            while l >= 2:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = np.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + (z if p >= 0.0 else -z)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if sweeps >= max_sweeps:
                return wr[1:], wi[1:], -1
            if its > 0 and its % 10 == 0:
                # exceptional shift
                t += x
                for i in range(1, nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            sweeps += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = np.sqrt(p * p + q * q + r * r)
                if p < 0.0:
                    s = -s
                if s != 0.0:
                    if k == m:
                        if l != m:
                            a[k, k - 1] = -a[k, k - 1]
                    else:
                        a[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    for j in range(k, nn + 1):
                        p = a[k, j] + q * a[k + 1, j]
                        if k != nn - 1:
                            p += r * a[k + 2, j]
                            a[k + 2, j] -= p * z
                        a[k + 1, j] -= p * y
                        a[k, j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * a[i, k] + y * a[i, k + 1]
                        if k != nn - 1:
                            p += z * a[i, k + 2]
                            a[i, k + 2] -= p * r
                        a[i, k + 1] -= p * q
                        a[i, k] -= p
    return wr[1:], wi[1:], sweeps


@numba.njit(cache=True)
def _hessenberg_solve(h, mu, rhs, tiny):
    # Solve (H - mu I) x = rhs by Gaussian elimination with adjacent-row pivoting.
    # Pivots smaller than ``tiny`` are floored (sign kept) so a shift sitting
    # on an eigenvalue yields a huge but finite solution, never inf.
    n = h.shape[0]
    a = h.copy()
    for i in range(n):
        a[i, i] -= mu
    b = rhs.copy()
    for k in range(n - 1):
        if abs(a[k + 1, k]) > abs(a[k, k]):
            for j in range(k, n):
                tmp = a[k, j]
                a[k, j] = a[k + 1, j]
                a[k + 1, j] = tmp
            tmp = b[k]
            b[k] = b[k + 1]
            b[k + 1] = tmp
        piv = a[k, k]
        if abs(piv) < tiny:
            piv = tiny if piv >= 0.0 else -tiny
            a[k, k] = piv
        f = a[k + 1, k] / piv
        if f != 0.0:
            for j in range(k, n):
                a[k + 1, j] -= f * a[k, j]
            b[k + 1] -= f * b[k]
    if abs(a[n - 1, n - 1]) < tiny:
        a[n - 1, n - 1] = tiny if a[n - 1, n - 1] >= 0.0 else -tiny
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for j in range(i + 1, n):
            acc -= a[i, j] * x[j]
        x[i] = acc / a[i, i]
    return x


def eigenvalues_hessenberg(h: np.ndarray, scale: float) -> np.ndarray:
    n = h.shape[0]
    wr, wi, sweeps = _hqr(np.ascontiguousarray(h), MAX_SWEEPS_PER_N * n)
    if sweeps < 0:
        raise ConvergenceError(f"QR iteration exceeded {MAX_SWEEPS_PER_N * n} sweeps")
    worst = float(np.max(np.abs(wi))) if n else 0.0
    if worst > IMAG_TOL * scale:
        raise SpectrumAssumptionError(
            f"eigenvalue with imaginary part {worst:.3g} exceeds {IMAG_TOL * scale:.3g}")
    return np.array(wr)


def eig_general(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real eigenpairs of a diagonalizable ``b`` with real spectrum.

    Returns eigenvalues sorted descending and unit-norm eigenvectors as
    columns. Eigenvalues closer than ``CLUSTER_TOL * max|b|`` are treated as
    one cluster whose vectors are kept mutually orthogonal.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] == 0:
        raise InvalidDimensionError(f"expected a non-empty square matrix, got {b.shape}")
    n = b.shape[0]
    scale = float(np.max(np.abs(b)))
    if scale == 0.0:
        return np.zeros(n), np.eye(n)
    h, q = hessenberg(b)
    lam = np.sort(eigenvalues_hessenberg(h, scale))[::-1]
    eps = np.finfo(float).eps
    start = np.random.default_rng(0).standard_normal((n, n))
    vecs = np.empty((n, n))
    cluster_start = 0
    for i in range(n):
        if i > 0 and lam[cluster_start] - lam[i] > CLUSTER_TOL * scale:
            cluster_start = i
        # nudge the shift off the eigenvalue so the solve stays finite
        mu = lam[i] + eps * scale * (1 + i - cluster_start)
        x = start[:, i] / np.linalg.norm(start[:, i])
        for _ in range(INVERSE_ITERATIONS):
            x = _hessenberg_solve(h, mu, x, eps * scale)
            prev = vecs[:, cluster_start:i]
            if prev.shape[1]:
                x -= prev @ (prev.T @ x)
            x /= np.max(np.abs(x))  # rescale first so the norm cannot overflow
            x /= np.linalg.norm(x)
        vecs[:, i] = x
    v = q @ vecs
    v /= np.linalg.norm(v, axis=0)
    return lam, v
