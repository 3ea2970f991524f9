"""Secret keys: scaled permutations, rank-one perturbations, their sum, and
the per-protocol key bundles.

A ``SecretMatrix`` ``M = P + H`` is never stored densely. ``P`` has one
nonzero ``p[i]`` per row, at column ``perm.forward[i]``; ``H = h 1^T`` has
every column equal to ``h``. ``M`` is invertible exactly when
``1 + sum(h / p) != 0``, and the cached ``trace_sum`` is that sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidKeyError,
    KeygenFailureError,
    ParameterError,
    ParseError,
)
from .matcore import Permutation, gen_permutation

MIN_KAPPA = 8
MAX_KAPPA = 52
DEFAULT_KAPPA = 16
MAX_RESAMPLES = 64
INV_REL_MARGIN = 1e-6


def _check_dim(*dims: int) -> None:
    for d in dims:
        if int(d) < 1:
            raise InvalidDimensionError(f"dimension must be >= 1, got {d}")


def _frozen(values, name: str, *, nonzero: bool) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InvalidKeyError(f"{name} contains non-finite entries")
    if nonzero and np.any(arr == 0.0):
        raise InvalidKeyError(f"{name} contains a zero entry")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScaledPermutation:
    perm: Permutation
    scale: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scale", _frozen(self.scale, "scale", nonzero=True))
        if len(self.scale) != len(self.perm):
            raise InvalidDimensionError("scale and permutation sizes differ")

    @classmethod
    def from_arrays(cls, forward, scale) -> "ScaledPermutation":
        return cls(Permutation.from_forward(forward), scale)

    @property
    def n(self) -> int:
        return len(self.perm)

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        out[np.arange(self.n), self.perm.forward] = self.scale
        return out

    def dense_inverse(self) -> np.ndarray:
        # P^-1(i, j) = delta(perm^-1(i), j) / p_j
        out = np.zeros((self.n, self.n))
        out[self.perm.forward, np.arange(self.n)] = 1.0 / self.scale
        return out


@dataclass(frozen=True)
class RankOnePerturbation:
    h: np.ndarray
    # test-only escape hatch for the degenerate identity key
    allow_zero: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "h", _frozen(self.h, "h", nonzero=not self.allow_zero))

    @property
    def n(self) -> int:
        return len(self.h)

    def dense(self) -> np.ndarray:
        return np.repeat(self.h[:, None], self.n, axis=1)


def invertibility_margin(p: ScaledPermutation, h: RankOnePerturbation) -> float:
    """``|1 + sum_i h_i / p_i|``; zero exactly when ``P + H`` is singular."""
    if p.n != h.n:
        raise InvalidDimensionError("P and H sizes differ")
    if np.any(p.scale == 0) or np.any(h.h == 0):
        raise InvalidKeyError("key entries must be nonzero")
    return abs(1.0 + float(np.sum(h.h / p.scale)))


@dataclass(frozen=True)
class SecretMatrix:
    """``M = P + H`` with the Sherman-Morrison denominator cached.

    Construction does not reject a small margin so that singular keys can be
    built for experiments; ``keygen_secret`` only ever returns keys with
    ``is_well_conditioned`` true, and inverse application refuses the rest.
    """

    p: ScaledPermutation
    h: RankOnePerturbation
    trace_sum: float = field(init=False)
    margin: float = field(init=False)

    def __post_init__(self):
        if self.p.n != self.h.n:
            raise InvalidDimensionError("P and H sizes differ")
        ts = float(np.sum(self.h.h / self.p.scale))
        object.__setattr__(self, "trace_sum", ts)
        object.__setattr__(self, "margin", abs(1.0 + ts))

    @property
    def n(self) -> int:
        return self.p.n

    @property
    def min_margin(self) -> float:
        return INV_REL_MARGIN * (1.0 + abs(self.trace_sum))

    @property
    def is_well_conditioned(self) -> bool:
        return self.margin > self.min_margin

    def dense(self) -> np.ndarray:
        return self.p.dense() + self.h.dense()

    @classmethod
    def from_arrays(cls, forward, scale, h) -> "SecretMatrix":
        return cls(ScaledPermutation.from_arrays(forward, scale), RankOnePerturbation(h))

    @classmethod
    def identity(cls, n: int) -> "SecretMatrix":
        """Degenerate ``M = I`` (zero ``h``). For tests only; never a real key."""
        return cls(ScaledPermutation(Permutation.identity(n), np.ones(n)),
                   RankOnePerturbation(np.zeros(n), allow_zero=True))


@dataclass(frozen=True)
class LeiKey:
    p1: ScaledPermutation
    p2: ScaledPermutation
    p3: ScaledPermutation


@dataclass(frozen=True)
class MmcKey:
    m1: SecretMatrix
    m2: SecretMatrix
    m3: SecretMatrix


@dataclass(frozen=True)
class LrKey:
    k: float
    signs: np.ndarray
    m_key: SecretMatrix
    r_vec: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k > 0):
            raise InvalidKeyError("k must be positive and finite")
        signs = np.array(self.signs, dtype=np.float64).reshape(-1)
        if not np.all(np.abs(signs) == 1.0):
            raise InvalidKeyError("signs must be +1 or -1")
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)
        r = _frozen(self.r_vec, "r_vec", nonzero=False)
        if len(r) != self.m_key.n:
            raise InvalidDimensionError("r_vec size must match M")
        object.__setattr__(self, "r_vec", r)

    @property
    def diag(self) -> np.ndarray:
        """Diagonal of the row mask ``A = diag(+-k)``."""
        return self.k * self.signs


@dataclass(frozen=True)
class EvdKey:
    alpha: float
    s_shift: float
    m_key: SecretMatrix

    def __post_init__(self):
        if self.alpha == 0 or not np.isfinite(self.alpha) or not np.isfinite(self.s_shift):
            raise InvalidKeyError("alpha must be nonzero and both scalars finite")


# --- sampling ---------------------------------------------------------------

def sample_nonzero(kappa: int, rng: np.random.Generator, size=None):
    """Draw from the kappa-bit key band: ``|v|`` uniform on
    ``[2**(kappa-1), 2**kappa)`` with an independent random sign."""
    if not MIN_KAPPA <= kappa <= MAX_KAPPA:
        raise ParameterError(f"kappa must lie in [{MIN_KAPPA}, {MAX_KAPPA}], got {kappa}")
    lo = 2.0 ** (kappa - 1)
    mag = lo + lo * rng.random(size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    out = sign * mag
    return float(out) if size is None else out


def keygen_scaled_permutation(n: int, kappa: int, rng: np.random.Generator) -> ScaledPermutation:
    _check_dim(n)
    perm = gen_permutation(n, rng)
    return ScaledPermutation(perm, sample_nonzero(kappa, rng, n))


def keygen_lei(m: int, n: int, s: int, kappa: int, rng: np.random.Generator) -> LeiKey:
    _check_dim(m, n, s)
    return LeiKey(*(keygen_scaled_permutation(d, kappa, rng) for d in (m, n, s)))


def keygen_secret(n: int, kappa: int, rng: np.random.Generator) -> SecretMatrix:
    """Fresh ``M = P + H``; ``h`` is redrawn until the invertibility margin holds."""
    _check_dim(n)
    p = keygen_scaled_permutation(n, kappa, rng)
    for _ in range(MAX_RESAMPLES):
        key = SecretMatrix(p, RankOnePerturbation(sample_nonzero(kappa, rng, n)))
        if key.is_well_conditioned:
            return key
    raise KeygenFailureError(f"no admissible h after {MAX_RESAMPLES} draws")


def keygen_mmc(m: int, n: int, s: int, kappa: int, rng: np.random.Generator) -> MmcKey:
    _check_dim(m, n, s)
    return MmcKey(*(keygen_secret(d, kappa, rng) for d in (m, n, s)))


def keygen_lr(m: int, n: int, kappa: int, rng: np.random.Generator) -> LrKey:
    _check_dim(m, n)
    k = abs(sample_nonzero(kappa, rng))
    signs = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    m_key = keygen_secret(n, kappa, rng)
    r_vec = sample_nonzero(kappa, rng, n)
    return LrKey(k, signs, m_key, r_vec)


def keygen_evd(n: int, kappa: int, rng: np.random.Generator) -> EvdKey:
    _check_dim(n)
    alpha = sample_nonzero(kappa, rng)
    s_shift = sample_nonzero(kappa, rng)
    return EvdKey(alpha, s_shift, keygen_secret(n, kappa, rng))


# --- key files --------------------------------------------------------------
#
# One "label v1 v2 ..." record per line, values at 17 significant digits.
#   kind <lei|mmc|lr|evd>
#   dims <d1> [<d2> ...]
#   per factor:  perm ... / scale ... / [h ...]
#   then protocol scalars: k, signs, r_vec (lr) or alpha, s (evd)

def _fmt(values) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.atleast_1d(values))


def _factor_lines(p: ScaledPermutation, h: RankOnePerturbation | None) -> list[str]:
    lines = ["perm " + " ".join(str(int(i)) for i in p.perm.forward), "scale " + _fmt(p.scale)]
    if h is not None:
        lines.append("h " + _fmt(h.h))
    return lines


def format_key(key) -> str:
    if isinstance(key, LeiKey):
        facs = (key.p1, key.p2, key.p3)
        lines = ["kind lei", "dims " + " ".join(str(f.n) for f in facs)]
        for f in facs:
            lines += _factor_lines(f, None)
    elif isinstance(key, MmcKey):
        facs = (key.m1, key.m2, key.m3)
        lines = ["kind mmc", "dims " + " ".join(str(f.n) for f in facs)]
        for f in facs:
            lines += _factor_lines(f.p, f.h)
    elif isinstance(key, LrKey):
        lines = ["kind lr", f"dims {len(key.signs)} {key.m_key.n}"]
        lines += _factor_lines(key.m_key.p, key.m_key.h)
        lines += ["k " + _fmt(key.k), "signs " + _fmt(key.signs), "r_vec " + _fmt(key.r_vec)]
    elif isinstance(key, EvdKey):
        lines = ["kind evd", f"dims {key.m_key.n}"]
        lines += _factor_lines(key.m_key.p, key.m_key.h)
        lines += ["alpha " + _fmt(key.alpha), "s " + _fmt(key.s_shift)]
    else:
        raise ParameterError(f"not a key bundle: {type(key).__name__}")
    return "\n".join(lines) + "\n"


def parse_key(text: str):
    records = []
    for ln in text.splitlines():
        if ln.strip():
            label, _, rest = ln.strip().partition(" ")
            records.append((label, rest.split()))
    it = iter(records)

    def take(label: str, conv=float):
        try:
            got, vals = next(it)
        except StopIteration:
            raise ParseError(f"key file ends before {label!r}") from None
        if got != label:
            raise ParseError(f"expected {label!r} record, found {got!r}")
        try:
            return [conv(v) for v in vals]
        except ValueError as exc:
            raise ParseError(f"bad value in {label!r}: {exc}") from None

    def scaled() -> ScaledPermutation:
        return ScaledPermutation.from_arrays(take("perm", int), take("scale"))

    def secret() -> SecretMatrix:
        return SecretMatrix(scaled(), RankOnePerturbation(take("h")))

    kind = take("kind", str)
    if len(kind) != 1:
        raise ParseError("kind record needs exactly one value")
    kind = kind[0]
    dims = take("dims", int)
    try:
        if kind == "lei":
            key = LeiKey(scaled(), scaled(), scaled())
            got = [key.p1.n, key.p2.n, key.p3.n]
        elif kind == "mmc":
            key = MmcKey(secret(), secret(), secret())
            got = [key.m1.n, key.m2.n, key.m3.n]
        elif kind == "lr":
            m_key = secret()
            key = LrKey(take("k")[0], take("signs"), m_key, take("r_vec"))
            got = [len(key.signs), m_key.n]
        elif kind == "evd":
            m_key = secret()
            key = EvdKey(take("alpha")[0], take("s")[0], m_key)
            got = [m_key.n]
        else:
            raise ParseError(f"unknown key kind {kind!r}")
    except (IndexError, InvalidDimensionError, InvalidKeyError, ParameterError) as exc:
        raise ParseError(f"inconsistent key record: {exc}") from None
    if got != dims:
        raise ParseError(f"dims record {dims} does not match factors {got}")
    return key


def save_key(key, path) -> None:
    Path(path).write_text(format_key(key))


def load_key(path):
    return parse_key(Path(path).read_text())
