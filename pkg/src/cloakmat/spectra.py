"""Outsourced PCA: covariance, similarity-masked eigendecomposition,
verification, unmasking and projection.

The client sends ``B = M (alpha A + s I) M^-1``. ``B`` has eigenvalues
``alpha * lambda + s`` and eigenvectors ``M v``, so the client recovers
``lambda = (lambda' - s) / alpha`` and ``v = M^-1 v'``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigensolve import CLUSTER_TOL, eig_general
from .errors import InvalidDimensionError, ParameterError, VerificationError
from .fastmul import apply_secret
from .keyforge import DEFAULT_KAPPA, EvdKey, keygen_mmc
from .matcore import as_matrix, max_abs
from .mmc import cloud_mmc, mmc_decrypt, mmc_encrypt, mmc_verify_transcript, random_bits

VERIFY_TOL = 1e-7
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (descending) and matching unit eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        n = len(self.eigenvalues)
        if self.eigenvectors.shape != (n, n):
            raise InvalidDimensionError(
                f"{n} eigenvalues but eigenvector matrix {self.eigenvectors.shape}")


def canonical_signs(v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Flip columns so the first clearly nonzero coordinate is positive."""
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        big = np.flatnonzero(np.abs(col) > tol * np.max(np.abs(col)))
        if big.size and col[big[0]] < 0:
            v[:, j] = -col
    return v


def _sorted_spectrum(lam: np.ndarray, vecs: np.ndarray) -> Spectrum:
    order = np.argsort(-lam, kind="stable")
    return Spectrum(lam[order], canonical_signs(vecs[:, order]))


def cov_matrix(d, *, outsource: bool = False, loops: int = 20,
               kappa: int = DEFAULT_KAPPA, rng: np.random.Generator | None = None):
    """Centre the columns of the ``n x m`` dataset and form ``A = X X^T``.

    With ``outsource=True`` the product goes through the masked
    multiplication protocol and is Freivalds-checked; ``rng`` is required.
    Returns ``(x_centered, a)``.
    """
    d = as_matrix(d, "d")
    if d.shape[1] < 2:
        raise InvalidDimensionError("need at least two observations (columns)")
    x = d - d.mean(axis=1, keepdims=True)
    if outsource:
        if rng is None:
            raise ParameterError("outsourced covariance needs an rng")
        xt = np.ascontiguousarray(x.T)
        key = keygen_mmc(x.shape[0], x.shape[1], x.shape[0], kappa, rng)
        task = mmc_encrypt(key, x, xt)
        res = cloud_mmc(task)
        if not mmc_verify_transcript(task, res, loops, rng):
            raise VerificationError("cloud returned a covariance that failed verification")
        a = mmc_decrypt(key, res)
    else:
        a = x @ x.T
    a = 0.5 * (a + a.T)
    return x, a


def evd_encrypt(key: EvdKey, a) -> np.ndarray:
    a = as_matrix(a, "a")
    n = a.shape[0]
    if a.shape != (n, n):
        raise InvalidDimensionError(f"covariance must be square, got {a.shape}")
    if key.m_key.n != n:
        raise InvalidDimensionError(f"key size {key.m_key.n} does not match {n}")
    if max_abs(a - a.T) > SYMMETRY_TOL * max(max_abs(a), 1.0):
        raise ParameterError("covariance matrix is not symmetric")
    shifted = key.alpha * a + key.s_shift * np.eye(n)
    return apply_secret(key.m_key, apply_secret(key.m_key, shifted, "left"), "right", inverse=True)


def cloud_evd(b) -> Spectrum:
    lam, vecs = eig_general(as_matrix(b, "b"))
    return Spectrum(lam, vecs)


def evd_verify(b, spec: Spectrum, loops: int, rng: np.random.Generator,
               tol: float = VERIFY_TOL) -> bool:
    """Monte Carlo check of ``B V' = V' diag(lambda')`` via ``(r B) V' - (r V') L'``."""
    if loops < 1:
        raise ParameterError("loops must be at least 1")
    b = as_matrix(b, "b")
    n = b.shape[0]
    v = as_matrix(spec.eigenvectors, "eigenvectors")
    lam = np.asarray(spec.eigenvalues, dtype=np.float64)
    if b.shape != (n, n) or v.shape != (n, n) or lam.shape != (n,):
        raise InvalidDimensionError("spectrum does not match the task matrix")
    if not np.all(np.isfinite(lam)):
        return False
    bound = tol * max_abs(b) * n
    for _ in range(loops):
        r = random_bits(n, rng)
        resid = (r @ b) @ v - (r @ v) * lam
        if not np.max(np.abs(resid)) <= bound:
            return False
    return True


def evd_decrypt(key: EvdKey, spec_enc: Spectrum) -> Spectrum:
    n = key.m_key.n
    if len(spec_enc.eigenvalues) != n:
        raise InvalidDimensionError("spectrum size does not match the key")
    lam = (np.asarray(spec_enc.eigenvalues) - key.s_shift) / key.alpha
    vecs = apply_secret(key.m_key, spec_enc.eigenvectors, "left", inverse=True)
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    order = np.argsort(-lam, kind="stable")
    lam, vecs = lam[order], vecs[:, order]
    _orthonormalize_clusters(lam, vecs)
    return Spectrum(lam, canonical_signs(vecs))


def _orthonormalize_clusters(lam: np.ndarray, vecs: np.ndarray) -> None:
    # Inverse iteration hands back some basis of a repeated eigenspace, not an
    # orthonormal one; QR inside each cluster keeps the span and restores
    # orthogonality for symmetric inputs. ``lam`` must be sorted descending.
    tol = CLUSTER_TOL * max(float(np.max(np.abs(lam))), np.finfo(float).tiny)
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i - 1] - lam[i] > tol:
            if i - start > 1:
                q, _ = np.linalg.qr(vecs[:, start:i])
                vecs[:, start:i] = q
            start = i


def pca_project(spec: Spectrum, d_keep: int, x_centered) -> np.ndarray:
    """Project onto the ``d_keep`` leading eigenvectors: ``(V_L)^T X``."""
    n = len(spec.eigenvalues)
    if not 1 <= d_keep <= n:
        raise ParameterError(f"d_keep must lie in [1, {n}], got {d_keep}")
    x = as_matrix(x_centered, "x_centered")
    if x.shape[0] != n:
        raise InvalidDimensionError(f"data has {x.shape[0]} rows, spectrum has {n}")
    return spec.eigenvectors[:, :d_keep].T @ x
