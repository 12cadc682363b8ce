"""Exact conjugate posteriors (Gamma and Dirichlet) with samplers and diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sps

from .special import (
    DomainError,
    beta_median,
    dirichlet_sampler,
    gamma_sampler,
    incomplete_beta,
    normal_pdf,
)


@dataclass(frozen=True)
class Posterior:
    """A conjugate posterior: ``Gamma(shape, rate)`` or ``Dirichlet(alpha)``."""

    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in ("gamma", "dirichlet"):
            raise ValueError(f"unknown posterior kind {self.kind!r}")
        flat = np.concatenate([np.ravel(p) for p in self.params]).astype(float)
        if np.any(~(flat > 0.0)):
            raise DomainError("posterior parameters must be strictly positive")

    # gamma accessors
    @property
    def shape(self) -> float:
        return float(self.params[0])

    @property
    def rate(self) -> float:
        return float(self.params[1])

    @property
    def alpha(self) -> np.ndarray:
        return np.asarray(self.params[0], dtype=float)

    @property
    def dim(self) -> int:
        return 1 if self.kind == "gamma" else self.alpha.size - 1

    def mean(self):
        if self.kind == "gamma":
            return self.shape / self.rate
        return (self.alpha / self.alpha.sum())[:-1]

    def variance(self):
        if self.kind == "gamma":
            return self.shape / self.rate**2
        a0 = self.alpha.sum()
        p = self.alpha / a0
        return (p * (1.0 - p) / (a0 + 1.0))[:-1]

    def sample(self, size: int, rng) -> np.ndarray:
        """Draws of shape (size,) for Gamma, (size, d-1) for Dirichlet (free coordinates)."""
        if self.kind == "gamma":
            return gamma_sampler(self.shape, self.rate, size, rng)
        return dirichlet_sampler(self.alpha, size, rng)[:, :-1]

    def density(self, theta):
        if self.kind != "gamma":
            raise NotImplementedError("density is provided for 1-D posteriors only")
        x = np.asarray(theta, dtype=float)
        a, r = self.shape, self.rate
        xp = np.where(x > 0.0, x, 1.0)
        logd = a * math.log(r) - math.lgamma(a) + (a - 1.0) * np.log(xp) - r * xp
        return np.where(x > 0.0, np.exp(logd), 0.0)

    def cdf(self, theta):
        if self.kind != "gamma":
            raise NotImplementedError("cdf is provided for 1-D posteriors only")
        return sps.gammainc(self.shape, self.rate * np.maximum(np.asarray(theta, float), 0.0))

    def marginal(self, k: int):
        """Beta(alpha_k, sum_{j != k} alpha_j) parameters of coordinate k (0-based)."""
        if self.kind != "dirichlet":
            raise NotImplementedError("marginals are defined for Dirichlet posteriors")
        a = self.alpha
        if not 0 <= k < a.size:
            raise IndexError(k)
        return float(a[k]), float(a.sum() - a[k])

    def marginal_quantile(self, k: int, u: float) -> float:
        if not 0.0 < u < 1.0:
            raise DomainError("quantile level must be in (0, 1)")
        if self.kind == "gamma":
            if k != 0:
                raise IndexError(k)
            return float(sps.gammaincinv(self.shape, u) / self.rate)
        a, b = self.marginal(k)
        if u == 0.5:
            return beta_median(a, b)
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if incomplete_beta(mid, a, b) < u:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def marginal_medians(self) -> np.ndarray:
        """Componentwise marginal posterior medians of the free coordinates."""
        return np.array([self.marginal_quantile(k, 0.5) for k in range(self.dim)])


def gamma_posterior(shape: float, rate: float) -> Posterior:
    return Posterior("gamma", (float(shape), float(rate)))


def dirichlet_posterior(alpha) -> Posterior:
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise DomainError("Dirichlet needs a concentration vector of length >= 2")
    return Posterior("dirichlet", (a,))


def update_exp_gamma(a: float, b: float, data) -> Posterior:
    """Gamma(a, b) prior and Exp(theta) data give Gamma(a + n, b + sum x)."""
    x = np.asarray(data, dtype=float).ravel()
    if np.any(~(x > 0.0)):
        raise DomainError("exponential data must be positive")
    return gamma_posterior(a + x.size, b + float(x.sum()))


def update_exp_gamma_stats(a: float, b: float, n: int, total: float) -> Posterior:
    """Same update from sufficient statistics (n, sum x)."""
    if n < 0 or total < 0.0:
        raise DomainError("sufficient statistics must be nonnegative")
    return gamma_posterior(a + n, b + total)


def update_mult_dirichlet(alpha, data) -> Posterior:
    """Dir(alpha) prior and one-hot Mult(1, p) data give Dir(alpha + counts)."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        return dirichlet_posterior(alpha)
    x = np.atleast_2d(x)
    if x.shape[1] != alpha.size:
        raise DomainError("data dimension does not match concentration vector")
    one_hot = np.all((x == 0.0) | (x == 1.0), axis=1) & (x.sum(axis=1) == 1.0)
    if not np.all(one_hot):
        raise DomainError("multinomial observations must be unit vectors")
    return update_mult_counts(alpha, x.sum(axis=0))


def update_mult_counts(alpha, counts) -> Posterior:
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise DomainError("counts must be nonnegative")
    return dirichlet_posterior(np.asarray(alpha, dtype=float) + counts)


# ---------------------------------------------------------------------------
# Bernstein-von Mises diagnostics


def posterior_tv_to_gaussian(post: Posterior, center: float, var: float) -> float:
    """Total variation between a 1-D posterior and N(center, var), by quadrature.

    The integration range is the union of +-12 standard deviations of both laws.
    """
    if post.kind != "gamma":
        raise NotImplementedError("TV to Gaussian is implemented for 1-D posteriors")
    if not var > 0.0:
        raise DomainError("variance must be positive")
    sd = math.sqrt(var)
    m, s = post.mean(), math.sqrt(post.variance())
    lo = min(center - 12.0 * sd, m - 12.0 * s)
    hi = max(center + 12.0 * sd, m + 12.0 * s)

    def integrand(x):
        return abs(float(post.density(x)) - normal_pdf((x - center) / sd) / sd)

    # breakpoints near both modes help the adaptive rule
    pts = sorted({c for c in (center, m, max(m - 2 * s, 0.0)) if lo < c < hi})
    val, _ = integrate.quad(integrand, lo, hi, points=pts, limit=400, epsabs=1e-12, epsrel=1e-10)
    return min(max(0.5 * val, 0.0), 1.0)


def bvm_gaussian_exp(theta0: float, n: int, data_mean: float):
    """Gaussian N(theta0 + Delta/sqrt(n), theta0^2/n) for the exponential model.

    The centering sequence Delta_n = I^{-1} n^{-1/2} sum score gives
    theta0 + theta0^2 (1/theta0 - mean x) = 2 theta0 - theta0^2 mean x.
    """
    return 2.0 * theta0 - theta0**2 * data_mean, theta0**2 / n


def tail_mass(post: Posterior, theta0: float, n: int, radius_scale=None) -> float:
    """Posterior mass of {|theta - theta0| > M_n / sqrt(n)} with M_n = log n by default."""
    if post.kind != "gamma":
        raise NotImplementedError("tail mass is implemented for 1-D posteriors")
    m_n = math.log(n) if radius_scale is None else radius_scale
    r = m_n / math.sqrt(n)
    upper = 1.0 - float(post.cdf(theta0 + r))
    lower = float(post.cdf(theta0 - r)) if theta0 - r > 0 else 0.0
    return upper + lower
