import math

import numpy as np
import pytest
from scipy import integrate

from bvmlab.families import (
    exponential_family,
    gaussian_location_family,
    gompertz_family,
    multinomial_family,
    multinomial_fisher_inverse,
    pareto_shape_family,
)
from bvmlab.special import DomainError, RngStream

ONE_D = [
    (exponential_family(), 1.7),
    (pareto_shape_family(), 3.5),
    (gompertz_family(), 2.0),
    (gaussian_location_family(1, [[2.0]]), 0.4),
]


def _integrate(f, lo, hi):
    pieces = [(lo, lo + 1.0), (lo + 1.0, lo + 30.0), (lo + 30.0, hi)] if math.isinf(hi) else [(lo, hi)]
    if math.isinf(lo):
        pieces = [(-math.inf, -30.0), (-30.0, 30.0), (30.0, math.inf)]
    return sum(integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=300)[0] for a, b in pieces)


@pytest.mark.parametrize("fam,t", ONE_D, ids=lambda v: getattr(v, "name", str(v)))
def test_density_integrates_to_one(fam, t):
    lo, hi = fam.support
    val = _integrate(lambda x: float(fam.density(x, t)), lo, hi)
    assert val == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("fam,t", ONE_D, ids=lambda v: getattr(v, "name", str(v)))
def test_quantile_inverts_cdf(fam, t):
    u = np.linspace(0.01, 0.99, 25)
    np.testing.assert_allclose(fam.cdf(fam.quantile(u, t), t), u, atol=1e-12)


@pytest.mark.parametrize("fam,t", ONE_D, ids=lambda v: getattr(v, "name", str(v)))
def test_fisher_is_score_variance(fam, t):
    # E[(d/dt log p_t)^2] with the score by central differences
    h = 1e-5

    def f(x):
        p = float(fam.density(x, t))
        if p == 0.0:
            return 0.0
        score = (math.log(float(fam.density(x, t + h))) - math.log(float(fam.density(x, t - h)))) / (2 * h)
        return score * score * p

    lo, hi = fam.support
    val = _integrate(f, lo, hi)
    assert val == pytest.approx(float(fam.fisher(t)[0, 0]), rel=1e-6)


@pytest.mark.parametrize("fam,t", ONE_D, ids=lambda v: getattr(v, "name", str(v)))
def test_sample_mean_matches_quadrature(fam, t):
    lo, hi = fam.support
    mean = _integrate(lambda x: x * float(fam.density(x, t)), lo, hi)
    var = _integrate(lambda x: (x - mean) ** 2 * float(fam.density(x, t)), lo, hi)
    x = fam.sample(t, 200_000, RngStream(11))
    assert abs(x.mean() - mean) < 4.5 * math.sqrt(var / x.size)


def test_pareto_needs_finite_second_moment():
    fam = pareto_shape_family()
    for bad in (2.0, 1.5, -1.0):
        with pytest.raises(DomainError):
            fam.fisher(bad)
    assert fam.domain[0] > 2.0


def test_pareto_transport_pushes_forward():
    fam = pareto_shape_family()
    T = fam.extras["transport"]
    x = np.linspace(1.01, 50.0, 40)
    np.testing.assert_allclose(fam.cdf(T(3.0, 4.0, x), 4.0), fam.cdf(x, 3.0), atol=1e-14)


def test_multinomial_fisher_inverse_at_uniform():
    inv = multinomial_fisher_inverse([1 / 3, 1 / 3])
    np.testing.assert_allclose(inv, [[2 / 9, -1 / 9], [-1 / 9, 2 / 9]], atol=1e-15)
    fam = multinomial_family(3)
    np.testing.assert_allclose(fam.fisher([1 / 3, 1 / 3]) @ inv, np.eye(2), atol=1e-12)


def test_multinomial_fisher_is_score_covariance():
    fam = multinomial_family(4)
    theta = np.array([0.1, 0.3, 0.25])
    p = np.append(theta, 1 - theta.sum())
    # score of category k: e_k / p_k (k < d) minus 1 / p_d for the last one
    fisher = np.zeros((3, 3))
    for k in range(4):
        s = np.zeros(3)
        if k < 3:
            s[k] = 1.0 / p[k]
        else:
            s[:] = -1.0 / p[3]
        fisher += p[k] * np.outer(s, s)
    np.testing.assert_allclose(fam.fisher(theta), fisher, rtol=1e-13)
    np.testing.assert_allclose(fam.fisher_inverse(theta), fam.extras["fisher_inverse"](theta), atol=1e-13)


def test_multinomial_sampling_and_domain():
    fam = multinomial_family(3)
    x = fam.sample([0.2, 0.5], 50_000, RngStream(5))
    assert x.shape == (50_000, 3)
    np.testing.assert_array_equal(x.sum(axis=1), 1.0)
    np.testing.assert_allclose(x.mean(axis=0), [0.2, 0.5, 0.3], atol=0.01)
    assert fam.density([0, 1, 0], [0.2, 0.5])[0] == pytest.approx(0.5)
    with pytest.raises(DomainError):
        fam.fisher([0.5, 0.5])
    with pytest.raises(DomainError):
        fam.check([0.7, 0.5])
    with pytest.raises(ValueError):
        multinomial_family(1)


def test_gaussian_family_multivariate():
    cov = np.array([[2.0, 0.3], [0.3, 1.0]])
    fam = gaussian_location_family(2, cov)
    np.testing.assert_allclose(fam.fisher([0.0, 0.0]), np.linalg.inv(cov))
    x = fam.sample([1.0, -1.0], 100_000, RngStream(9))
    np.testing.assert_allclose(np.cov(x.T), cov, atol=0.03)
    with pytest.raises(DomainError):
        gaussian_location_family(2, [[1.0, 2.0], [2.0, 1.0]])
