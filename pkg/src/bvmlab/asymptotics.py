"""Diagnostics for the asymptotic law of Bayes estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discrete_ot import empirical_w2_1d, empirical_w2_2d
from .special import DomainError, SymMat2, normal_cdf, normal_quantile, normal_sampler, spd2_sqrt


@dataclass(frozen=True)
class ReplicationSet:
    """Estimates theta_hat (M x d) from M independent data sets of size n."""

    n: int
    theta0: np.ndarray
    estimates: np.ndarray
    loss_name: str = ""
    seed: int = 0

    def __post_init__(self):
        est = np.asarray(self.estimates, dtype=float)
        if est.ndim == 1:
            est = est[:, None]
        th0 = np.atleast_1d(np.asarray(self.theta0, dtype=float))
        if est.shape[0] < 2:
            raise ValueError("need at least two replications")
        if est.shape[1] != th0.size:
            raise ValueError("estimate dimension does not match theta0")
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "theta0", th0)

    @property
    def dim(self) -> int:
        return self.theta0.size

    def raw(self) -> np.ndarray:
        """sqrt(n) (theta_hat - theta0), one row per replication."""
        return math.sqrt(self.n) * (self.estimates - self.theta0)


def fisher_sqrt(fisher) -> np.ndarray:
    """Symmetric square root of an SPD Fisher matrix (d <= 2 closed form)."""
    f = np.atleast_2d(np.asarray(fisher, dtype=float))
    if f.shape == (1, 1):
        if not f[0, 0] > 0.0:
            raise DomainError("Fisher information must be positive")
        return np.sqrt(f)
    if f.shape == (2, 2):
        m = SymMat2.from_array(f)
        if not m.is_spd():
            raise DomainError("Fisher information must be SPD")
        return spd2_sqrt(m).to_array()
    w, v = np.linalg.eigh(f)
    if np.any(w <= 0.0):
        raise DomainError("Fisher information must be SPD")
    return (v * np.sqrt(w)) @ v.T


def standardize(reps: ReplicationSet, fisher) -> np.ndarray:
    """Rows I^{1/2} sqrt(n) (theta_hat - theta0); approximately N(0, I_d) when efficient."""
    root = fisher_sqrt(fisher)
    return reps.raw() @ root.T


def ks_statistic(samples) -> float:
    """sup_x |F_M(x) - Phi(x)| for the empirical CDF of the samples."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    m = x.size
    if m == 0:
        raise DomainError("KS statistic needs at least one sample")
    cdf = normal_cdf(x)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - cdf), np.max(cdf - (i - 1) / m)))


def qq_points(samples) -> np.ndarray:
    """Pairs (Phi^{-1}((i - 0.5)/M), x_(i)) as an (M, 2) array."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    m = x.size
    if m == 0:
        raise DomainError("QQ points need at least one sample")
    q = normal_quantile((np.arange(1, m + 1) - 0.5) / m)
    return np.column_stack([np.atleast_1d(q), x])


def gaussian_limit_distance(reps: ReplicationSet, fisher, rng) -> float:
    """Empirical W2 between {sqrt(n)(theta_hat - theta0)} and M draws of N(0, I^{-1})."""
    if reps.dim > 2:
        raise NotImplementedError("exact W2 diagnostic supports d <= 2")
    cov = np.linalg.inv(np.atleast_2d(np.asarray(fisher, dtype=float)))
    m = reps.estimates.shape[0]
    ref = normal_sampler(np.zeros(reps.dim), cov, m, rng)
    pts = reps.raw()
    if reps.dim == 1:
        return empirical_w2_1d(pts[:, 0], ref[:, 0])
    return empirical_w2_2d(pts, ref)
