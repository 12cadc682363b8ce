"""Parametric statistical models used by the experiments and loss oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .special import DomainError, _as_generator, normal_cdf, normal_quantile


@dataclass(frozen=True)
class ParametricFamily:
    """A statistical model P_theta with the pieces the rest of the package needs.

    ``domain`` is the operational parameter box ``(lo, hi)`` used by searches.
    ``support`` is the observation support of 1-D members. Callables that a
    family does not provide are ``None``.
    """

    name: str
    dim: int
    domain: tuple
    density: Callable
    fisher: Callable
    sample: Callable
    cdf: Optional[Callable] = None
    quantile: Optional[Callable] = None
    support: tuple = (-math.inf, math.inf)
    check: Callable = field(default=lambda theta: None, repr=False)
    extras: dict = field(default_factory=dict, repr=False)

    def fisher_inverse(self, theta) -> np.ndarray:
        return np.linalg.inv(np.atleast_2d(self.fisher(theta)))


def _positive(name):
    def check(theta):
        if not np.all(np.asarray(theta, dtype=float) > 0.0):
            raise DomainError(f"{name} parameter must be positive, got {theta}")
    return check


def exponential_family() -> ParametricFamily:
    """Exp(t) with rate t > 0."""
    check = _positive("exponential rate")

    def density(x, t):
        check(t)
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, t * np.exp(-t * np.maximum(x, 0.0)), 0.0)

    def cdf(x, t):
        check(t)
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, -np.expm1(-t * np.maximum(x, 0.0)), 0.0)

    def quantile(u, t):
        check(t)
        return -np.log1p(-np.asarray(u, dtype=float)) / t

    def fisher(t):
        check(t)
        return np.array([[1.0 / t**2]])

    def sample(t, n, rng):
        check(t)
        return _as_generator(rng).exponential(1.0 / t, size=n)

    return ParametricFamily(
        name="exponential", dim=1, domain=(1e-6, math.inf), density=density,
        fisher=fisher, sample=sample, cdf=cdf, quantile=quantile,
        support=(0.0, math.inf), check=check,
    )


PARETO_MIN_SHAPE = 2.05
PARETO_MAX_SHAPE = 200.0


def _pareto_check(theta):
    if not np.all(np.asarray(theta, dtype=float) > 2.0):
        raise DomainError(f"Pareto shape must exceed 2 (finite second moment), got {theta}")


def pareto_shape_family() -> ParametricFamily:
    """Pareto(1, t) on (1, inf) with density t x^(-t-1), shape t > 2."""

    def density(x, t):
        _pareto_check(t)
        x = np.asarray(x, dtype=float)
        return np.where(x >= 1.0, t * np.power(np.maximum(x, 1.0), -t - 1.0), 0.0)

    def cdf(x, t):
        _pareto_check(t)
        x = np.asarray(x, dtype=float)
        return np.where(x > 1.0, -np.expm1(-t * np.log(np.maximum(x, 1.0))), 0.0)

    def quantile(u, t):
        _pareto_check(t)
        return np.power(1.0 - np.asarray(u, dtype=float), -1.0 / t)

    def fisher(t):
        _pareto_check(t)
        return np.array([[1.0 / t**2]])

    def sample(t, n, rng):
        return quantile(_as_generator(rng).random(n), t)

    def transport(t, theta, x):
        """Monotone map pushing Pareto(1, t) onto Pareto(1, theta)."""
        _pareto_check(t)
        _pareto_check(theta)
        return np.power(np.asarray(x, dtype=float), t / theta)

    return ParametricFamily(
        name="pareto", dim=1, domain=(PARETO_MIN_SHAPE, PARETO_MAX_SHAPE),
        density=density, fisher=fisher, sample=sample, cdf=cdf, quantile=quantile,
        support=(1.0, math.inf), check=_pareto_check, extras={"transport": transport},
    )


def gompertz_family() -> ParametricFamily:
    """Gompertz law with shape t > 0: density t exp(t + x - t e^x) on x > 0."""
    check = _positive("Gompertz shape")

    def density(x, t):
        check(t)
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        return np.where(x >= 0.0, t * np.exp(t + xp - t * np.exp(xp)), 0.0)

    def cdf(x, t):
        check(t)
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, -np.expm1(-t * np.expm1(np.maximum(x, 0.0))), 0.0)

    def quantile(u, t):
        check(t)
        return np.log1p(-np.log1p(-np.asarray(u, dtype=float)) / t)

    def fisher(t):
        # score 1/t + 1 - e^x; with Y = e^x - 1 ~ Exp(t) this is 1/t - Y
        check(t)
        return np.array([[1.0 / t**2]])

    def sample(t, n, rng):
        return quantile(_as_generator(rng).random(n), t)

    return ParametricFamily(
        name="gompertz", dim=1, domain=(1e-6, math.inf), density=density,
        fisher=fisher, sample=sample, cdf=cdf, quantile=quantile,
        support=(0.0, math.inf), check=check,
    )


def _full_probabilities(theta, d: int, *, strict: bool) -> np.ndarray:
    a = np.atleast_1d(np.asarray(theta, dtype=float))
    if a.shape != (d - 1,):
        raise DomainError(f"expected {d - 1} free coordinates, got shape {a.shape}")
    p = np.append(a, 1.0 - a.sum())
    if strict and np.any(p <= 0.0):
        raise DomainError(f"parameter {theta} is on the simplex boundary")
    if np.any(p < -1e-12):
        raise DomainError(f"parameter {theta} is outside the simplex")
    return p


def multinomial_family(d: int) -> ParametricFamily:
    """Mult(1, p) on the unit vectors of R^d, parametrized by the first d-1 coordinates."""
    if d < 2:
        raise ValueError("multinomial family needs d >= 2")

    def density(x, theta):
        p = _full_probabilities(theta, d, strict=False)
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x @ p

    def fisher(theta):
        p = _full_probabilities(theta, d, strict=True)
        return np.diag(1.0 / p[:-1]) + 1.0 / p[-1]

    def fisher_inverse(theta):
        p = _full_probabilities(theta, d, strict=True)[:-1]
        return np.diag(p) - np.outer(p, p)

    def sample(theta, n, rng):
        p = _full_probabilities(theta, d, strict=False)
        idx = _as_generator(rng).choice(d, size=n, p=p)
        return np.eye(d)[idx]

    fam = ParametricFamily(
        name=f"multinomial{d}", dim=d - 1, domain=(0.0, 1.0), density=density,
        fisher=fisher, sample=sample, support=(0.0, 1.0),
        check=lambda theta: _full_probabilities(theta, d, strict=False),
        extras={"d": d, "fisher_inverse": fisher_inverse},
    )
    return fam


def multinomial_fisher_inverse(theta) -> np.ndarray:
    """Inverse Fisher information diag(p) - p p^T in the (d-1)-coordinate chart."""
    p = np.atleast_1d(np.asarray(theta, dtype=float))
    return multinomial_family(p.size + 1).extras["fisher_inverse"](p)


def gaussian_location_family(d: int = 1, cov=None) -> ParametricFamily:
    """N_d(theta, cov) with known covariance."""
    cov = np.eye(d) if cov is None else np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape != (d, d):
        raise ValueError("covariance shape does not match dimension")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise DomainError("covariance is not SPD") from exc
    prec = np.linalg.inv(cov)
    log_norm = -0.5 * d * math.log(2.0 * math.pi) - float(np.sum(np.log(np.diag(chol))))

    def _theta(theta):
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if th.shape != (d,):
            raise DomainError(f"expected a length-{d} location, got shape {th.shape}")
        return th

    def density(x, theta):
        th = _theta(theta)
        x = np.asarray(x, dtype=float)
        z = (x.reshape(-1, d) - th)
        q = np.einsum("ij,jk,ik->i", z, prec, z)
        out = np.exp(log_norm - 0.5 * q)
        return out.reshape(x.shape[:-1] if d > 1 else x.shape)

    def fisher(theta):
        _theta(theta)
        return prec.copy()

    def sample(theta, n, rng):
        th = _theta(theta)
        z = _as_generator(rng).standard_normal((n, d))
        out = th + z @ chol.T
        return out[:, 0] if d == 1 else out

    if d == 1:
        sd = float(chol[0, 0])

        def cdf(x, theta):
            return normal_cdf((np.asarray(x, dtype=float) - _theta(theta)[0]) / sd)

        def quantile(u, theta):
            return _theta(theta)[0] + sd * normal_quantile(u)
    else:
        cdf = quantile = None

    return ParametricFamily(
        name=f"gaussian{d}", dim=d, domain=(-math.inf, math.inf), density=density,
        fisher=fisher, sample=sample, cdf=cdf, quantile=quantile,
        check=_theta, extras={"cov": cov},
    )
