"""Special functions, 2x2 matrix kernels and seeded random streams."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sps

EULER_GAMMA = 0.57721566490153286061
_EPS = 1e-16


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of a function."""


# ---------------------------------------------------------------------------
# exponential integral


def _e1_series(s: float) -> float:
    # E1(s) = -gamma - log s - sum_{k>=1} (-s)^k / (k k!)
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= -s / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total) or k > 200:
            break
        k += 1
    return -EULER_GAMMA - math.log(s) - total


def _e1_scaled_cf(s: float) -> float:
    """e^s E1(s) by the modified Lentz continued fraction, valid for s > 1."""
    tiny = 1e-300
    b = s + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def exp_integral_e1(s: float) -> float:
    """Exponential integral E1(s) = int_s^inf exp(-u)/u du for s > 0."""
    s = float(s)
    if not s > 0.0:
        raise DomainError(f"E1 requires s > 0, got {s}")
    if s <= 1.0:
        return _e1_series(s)
    return math.exp(-s) * _e1_scaled_cf(s)


def exp_e1_scaled(s: float) -> float:
    """e^s E1(s), which stays finite (~1/s) where E1 itself underflows."""
    s = float(s)
    if not s > 0.0:
        raise DomainError(f"E1 requires s > 0, got {s}")
    if s <= 1.0:
        return math.exp(s) * _e1_series(s)
    return _e1_scaled_cf(s)


# ---------------------------------------------------------------------------
# normal distribution


def normal_cdf(x):
    return sps.ndtr(x)


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def normal_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0.0) | (p_arr >= 1.0)) or np.any(np.isnan(p_arr)):
        raise DomainError("normal quantile requires 0 < p < 1")
    return sps.ndtri(p_arr) if p_arr.ndim else float(sps.ndtri(p_arr))


# ---------------------------------------------------------------------------
# incomplete beta and Beta medians


def _betacf(a: float, b: float, x: float) -> float:
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 1000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b) via a continued fraction."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError("incomplete beta requires a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the fraction converges fast on the side of the mean a/(a+b)
    if x < a / (a + b):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def beta_median(a: float, b: float, iterations: int = 80) -> float:
    """Median of Beta(a, b) by bisection on the incomplete beta function."""
    a = float(a)
    b = float(b)
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"Beta shapes must be positive, got ({a}, {b})")
    if a == b:
        return 0.5
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if incomplete_beta(mid, a, b) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# symmetric 2x2 matrices


@dataclass(frozen=True)
class SymMat2:
    """Symmetric 2x2 matrix [[a, b], [b, c]]."""

    a: float
    b: float
    c: float

    @classmethod
    def from_array(cls, m) -> "SymMat2":
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(float(m[0, 0]), 0.5 * float(m[0, 1] + m[1, 0]), float(m[1, 1]))

    @classmethod
    def identity(cls) -> "SymMat2":
        return cls(1.0, 0.0, 1.0)

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]])

    @property
    def det(self) -> float:
        return self.a * self.c - self.b * self.b

    @property
    def trace(self) -> float:
        return self.a + self.c

    def is_spd(self) -> bool:
        return self.a > 0.0 and self.det > 0.0

    def inverse(self) -> "SymMat2":
        det = self.det
        if det == 0.0:
            raise DomainError("singular matrix")
        return SymMat2(self.c / det, -self.b / det, self.a / det)


def spd2_sqrt(m: SymMat2) -> SymMat2:
    """Principal square root of an SPD 2x2 matrix.

    Uses the Cayley-Hamilton identity R = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M)).
    """
    if not m.is_spd():
        raise DomainError(f"matrix is not SPD: {m}")
    s = math.sqrt(m.det)
    t = math.sqrt(m.trace + 2.0 * s)
    return SymMat2((m.a + s) / t, m.b / t, (m.c + s) / t)


# ---------------------------------------------------------------------------
# random streams and samplers


@dataclass(frozen=True)
class RngStream:
    """Value-semantic handle on a reproducible random stream.

    Every call to :meth:`generator` starts the stream from the beginning, so
    identical ``(seed, stream_id)`` pairs always yield identical draws.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *labels) -> "RngStream":
        return RngStream(self.seed, stream_hash(self.stream_id, *labels))


def stream_hash(*labels) -> int:
    """Stable 64-bit id for an arbitrary tuple of labels (not Python's salted hash)."""
    text = "\x1f".join(repr(x) for x in labels).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def gamma_sampler(shape: float, rate: float, size, rng) -> np.ndarray:
    if not (shape > 0.0 and rate > 0.0):
        raise DomainError(f"Gamma needs shape, rate > 0, got ({shape}, {rate})")
    return _as_generator(rng).gamma(shape, 1.0 / rate, size=size)


def dirichlet_sampler(alpha, size: int, rng) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size < 2 or np.any(alpha <= 0.0):
        raise DomainError("Dirichlet concentration must be a positive vector of length >= 2")
    # normalized gammas; numpy's own dirichlet switches algorithms for small alpha
    g = _as_generator(rng).gamma(alpha, 1.0, size=(size, alpha.size))
    return g / g.sum(axis=1, keepdims=True)


def normal_sampler(mean, cov, size: int, rng) -> np.ndarray:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape != (mean.size, mean.size):
        raise DomainError("covariance shape does not match mean")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise DomainError("covariance is not SPD") from exc
    z = _as_generator(rng).standard_normal((size, mean.size))
    return mean + z @ chol.T
