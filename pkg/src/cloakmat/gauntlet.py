"""Security lab: the zero-element distinguishing game and result tampering."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .keyforge import DEFAULT_KAPPA, keygen_lei, keygen_mmc
from .fastmul import apply_perm, apply_secret
from .matcore import as_matrix, make_rng, max_abs

ZERO_TOL = 1e-12
ZERO_FRACTION = 0.3
SCHEMES = ("lei", "proposed")


def zero_count(t, tau: float = ZERO_TOL) -> int:
    """Entries with ``|v| <= tau * max|t|`` (absolute ``tau`` for the zero matrix)."""
    if not tau > 0:
        raise ParameterError("tau must be positive")
    t = np.asarray(t, dtype=np.float64)
    scale = max_abs(t)
    thresh = tau * scale if scale > 0 else tau
    return int(np.count_nonzero(np.abs(t) <= thresh))


@dataclass(frozen=True)
class ZeaTrialReport:
    scheme: str
    rows: int
    cols: int
    trials: int
    wins: int

    @property
    def advantage(self) -> float:
        return abs(self.wins / self.trials - 0.5)

    def line(self) -> str:
        return (f"scheme={self.scheme} dims={self.rows}x{self.cols} trials={self.trials} "
                f"wins={self.wins} advantage={self.advantage:.4f}")


def encrypt_one(scheme: str, t: np.ndarray, kappa: int, rng: np.random.Generator) -> np.ndarray:
    """Encrypt a single matrix the way ``X`` is encrypted in the multiplication task."""
    m, n = t.shape
    if scheme == "lei":
        key = keygen_lei(m, n, 1, kappa, rng)
        return apply_perm(key.p2, apply_perm(key.p1, t, "left"), "right", inverse=True)
    if scheme == "proposed":
        key = keygen_mmc(m, n, 1, kappa, rng)
        return apply_secret(key.m2, apply_secret(key.m1, t, "left"), "right", inverse=True)
    raise ParameterError(f"scheme must be one of {SCHEMES}, got {scheme!r}")


def challenge_pair(m: int, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Adversary's plaintexts: ``T0`` with 30% exact zeros, ``T1`` with none."""
    t1 = rng.uniform(1.0, 2.0, (m, n)) * np.where(rng.random((m, n)) < 0.5, -1.0, 1.0)
    t0 = rng.uniform(1.0, 2.0, (m, n)) * np.where(rng.random((m, n)) < 0.5, -1.0, 1.0)
    zeros = rng.choice(m * n, size=max(1, round(ZERO_FRACTION * m * n)), replace=False)
    t0.flat[zeros] = 0.0
    return t0, t1


def ind_zea_game(scheme: str, m: int, n: int, trials: int, rng: np.random.Generator,
                 kappa: int = DEFAULT_KAPPA) -> ZeaTrialReport:
    """Play the distinguishing game ``trials`` times with a zero-counting adversary.

    Each trial gets its own generator seeded from ``rng`` so a report is
    reproducible from the starting seed alone.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if scheme not in SCHEMES:
        raise ParameterError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    seeds = rng.integers(0, 2**63, size=trials)
    wins = 0
    for seed in seeds:
        trng = make_rng(int(seed))
        t0, t1 = challenge_pair(m, n, trng)
        b = int(trng.integers(0, 2))
        cipher = encrypt_one(scheme, (t0, t1)[b], kappa, trng)
        guess = 0 if zero_count(cipher) >= 1 else 1
        wins += guess == b
    return ZeaTrialReport(scheme, m, n, trials, wins)


def tamper(t, mode: str, magnitude: float, rng: np.random.Generator) -> np.ndarray:
    """Corrupted copy of ``t``; offsets are ``magnitude * max|t|``.

    ``single-entry`` shifts one entry, ``row`` shifts every entry of one row,
    ``scale`` multiplies everything by ``1 + magnitude``.
    """
    if not magnitude > 0:
        raise ParameterError("magnitude must be positive")
    t = np.array(t, dtype=np.float64)
    if t.size == 0:
        raise ParameterError("cannot tamper with an empty matrix")
    vec = t.ndim == 1
    out = as_matrix(t, finite=False).copy()
    base = max_abs(out) or 1.0
    if mode == "single-entry":
        i, j = rng.integers(0, out.shape[0]), rng.integers(0, out.shape[1])
        sign = 1.0 if rng.random() < 0.5 else -1.0
        out[i, j] += sign * magnitude * base
    elif mode == "row":
        i = rng.integers(0, out.shape[0])
        signs = np.where(rng.random(out.shape[1]) < 0.5, -1.0, 1.0)
        out[i] += signs * magnitude * base
    elif mode == "scale":
        if max_abs(out) == 0:
            raise ParameterError("scaling cannot change the zero matrix")
        out *= 1.0 + magnitude
    else:
        raise ParameterError(f"unknown tamper mode {mode!r}")
    if np.array_equal(out, as_matrix(t, finite=False)):
        raise ParameterError(f"magnitude {magnitude} is below the resolution of the data")
    return out.reshape(-1) if vec else out
