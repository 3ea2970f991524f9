"""Independent reference implementations used only by the tests.

None of these share code with the package: dense keys are built from the
index definitions, eigenvalues come from Jacobi rotations or Sturm
bisection, and determinants/inverses come from scipy's LU.
"""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla


def dense_perm(forward, scale) -> np.ndarray:
    """P(i, j) = p_i when j == pi(i)."""
    n = len(forward)
    p = np.zeros((n, n))
    for i in range(n):
        p[i, forward[i]] = scale[i]
    return p


def dense_h(h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    return np.outer(h, np.ones(len(h)))


def dense_secret(m) -> np.ndarray:
    return dense_perm(m.p.perm.forward, m.p.scale) + dense_h(m.h.h)


def lu_det(a) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)  # exact singularity is a valid answer here
        lu, piv = sla.lu_factor(a)
    sign = (-1) ** np.count_nonzero(piv != np.arange(len(piv)))
    return float(sign * np.prod(np.diag(lu)))


def lu_inverse(a) -> np.ndarray:
    return sla.lu_solve(sla.lu_factor(a), np.eye(a.shape[0]))


def column_major_product(a, b) -> np.ndarray:
    """j-outer, k-middle, i-inner accumulation; a different loop order from i-k-j."""
    m, n = a.shape
    s = b.shape[1]
    out = np.zeros((m, s))
    for j in range(s):
        for k in range(n):
            bkj = b[k, j]
            for i in range(m):
                out[i, j] += a[i, k] * bkj
    return out


def jacobi_eig(a, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi rotations; returns (eigenvalues desc, unit eigenvector columns)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(np.linalg.norm(a), 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                # A <- R^T A R with R the (p, q) plane rotation, applied to two rows and columns
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p], a[:, q] = c * ap - s * aq, s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :], a[q, :] = c * ap - s * aq, s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
    lam = np.diag(a).copy()
    order = np.argsort(-lam)
    return lam[order], v[:, order]


def _tridiagonalize(a):
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        alpha = -np.copysign(np.linalg.norm(x), x[0] if x[0] != 0 else 1.0)
        v = x
        v[0] -= alpha
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        v /= nv
        h = np.eye(n)
        h[k + 1:, k + 1:] -= 2 * np.outer(v, v)
        a = h @ a @ h
    return np.diag(a).copy(), np.diag(a, -1).copy()


def _sturm_count(d, e, x) -> int:
    """Eigenvalues of the tridiagonal (d, e) strictly less than x."""
    count = 0
    q = 1.0
    for i in range(len(d)):
        q = d[i] - x - (e[i - 1] ** 2 / q if i > 0 else 0.0)
        if q == 0.0:
            q = -1e-300
        if q < 0:
            count += 1
    return count


def sturm_eigenvalues(a, tol=1e-13) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by bisection on the Sturm count, descending."""
    d, e = _tridiagonalize(a)
    n = len(d)
    radius = np.max(np.abs(d)) + 2 * (np.max(np.abs(e)) if n > 1 else 0.0) + 1.0
    out = []
    for k in range(n):
        lo, hi = -radius, radius
        while hi - lo > tol * radius:
            mid = 0.5 * (lo + hi)
            if _sturm_count(d, e, mid) > k:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.sort(out)[::-1]


def normal_equations_ls(x, y):
    """Plaintext least squares through scipy's LAPACK solver (QR-free, SVD based)."""
    return sla.lstsq(x, y)[0]


def rel_fro(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
