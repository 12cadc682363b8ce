import math

import numpy as np
import pytest

from bvmlab.losses import pareto_curvature, w2sq_pareto, w2sq_pareto_grad
from bvmlab.special import DomainError
from bvmlab.wass_calculus import (
    central_difference,
    derivative_check_grid,
    pareto_dual_model,
    pareto_fd_gradient,
    pareto_fd_hessian,
    second_difference,
    tail_contribution,
    w2_gradient_dual,
    w2_hessian_dual,
)

MODEL = pareto_dual_model()
GRID = np.linspace(2.5, 6.0, 5)


def test_displayed_derivatives():
    assert float(MODEL.dF_dt(3.0, 2.0)) == pytest.approx(math.log(2.0) / 8.0, rel=1e-15)
    assert float(MODEL.dF_dt(3.0, 2.0)) == pytest.approx(0.0866434, abs=1e-7)
    fam = MODEL.family
    # parameter derivatives of the density and CDF by central differences
    for t, x in [(3.0, 2.0), (4.5, 1.3), (2.7, 10.0)]:
        h = 1e-6
        fd_p = (fam.density(x, t + h) - fam.density(x, t - h)) / (2 * h)
        fd_F = (fam.cdf(x, t + h) - fam.cdf(x, t - h)) / (2 * h)
        assert float(MODEL.dp_dt(t, x)) == pytest.approx(float(fd_p), rel=1e-7)
        assert float(MODEL.dF_dt(t, x)) == pytest.approx(float(fd_F), rel=1e-7)
        h = 1e-4
        fd_F2 = (fam.cdf(x, t + h) - 2 * fam.cdf(x, t) + fam.cdf(x, t - h)) / h**2
        assert float(MODEL.d2F_dt2(t, x)) == pytest.approx(float(fd_F2), rel=1e-5)
        fd_T = (MODEL.transport(t + h, 4.0, x) - MODEL.transport(t - h, 4.0, x)) / (2 * h)
        assert float(MODEL.dtransport_dt(t, 4.0, x)) == pytest.approx(float(fd_T), rel=1e-7)


def test_transport_pushes_forward():
    fam = MODEL.family
    assert float(fam.cdf(MODEL.transport(3.0, 4.0, 2.0), 4.0)) == pytest.approx(float(fam.cdf(2.0, 3.0)), abs=1e-12)
    x = np.linspace(1.001, 200.0, 200)
    for t, th in [(2.5, 6.0), (5.0, 3.0)]:
        np.testing.assert_allclose(fam.cdf(MODEL.transport(t, th, x), th), fam.cdf(x, t), atol=1e-9)


def test_potential_gradient_is_displacement():
    x = 2.0
    h = 1e-6
    fd = (MODEL.phi(3.0, 4.0, x + h) - MODEL.phi(3.0, 4.0, x - h)) / (2 * h)
    assert float(fd) == pytest.approx(2.0 * (x - x ** 0.75), abs=1e-8)
    for t, th in [(2.5, 6.0), (5.0, 3.0)]:
        for x in (1.2, 3.0, 25.0):
            fd = (MODEL.phi(t, th, x + h) - MODEL.phi(t, th, x - h)) / (2 * h)
            assert float(fd) == pytest.approx(2.0 * (x - float(MODEL.transport(t, th, x))), abs=1e-6 * max(1, x))


def test_transport_derivative_in_x():
    for x in (1.5, 7.0):
        h = 1e-6
        fd = (MODEL.transport(3.0, 4.0, x + h) - MODEL.transport(3.0, 4.0, x - h)) / (2 * h)
        assert float(MODEL.dtransport_dx(3.0, 4.0, x)) == pytest.approx(float(fd), rel=1e-8)


def test_model_domain():
    for f in (lambda: MODEL.phi(3.0, 4.0, 1.0), lambda: MODEL.dF_dt(3.0, 0.5),
              lambda: MODEL.transport(3.0, 4.0, np.array([2.0, 0.9]))):
        with pytest.raises(DomainError):
            f()


def test_gradient_examples():
    assert w2_gradient_dual(MODEL, 3.0, 4.0) == pytest.approx(-0.72, rel=1e-8)
    assert pareto_fd_gradient(3.0, 4.0) == pytest.approx(-0.72, abs=1e-8)
    assert abs(w2_gradient_dual(MODEL, 4.0, 4.0)) <= 1e-8


def test_gradient_invariant_to_potential_constant():
    for t, th in [(3.0, 4.0), (2.6, 5.5), (5.0, 3.0)]:
        a = w2_gradient_dual(MODEL, t, th, C=0.0)
        b = w2_gradient_dual(MODEL, t, th, C=7.0)
        assert abs(a - b) <= 1e-8


def test_hessian_examples():
    assert w2_hessian_dual(MODEL, 3.0, 4.0) == pytest.approx(pareto_fd_hessian(3.0, 4.0), rel=1e-4)
    # at the minimum the Hessian equals the curvature 4 / (theta (theta - 2)^3)
    assert w2_hessian_dual(MODEL, 4.0, 4.0) == pytest.approx(pareto_curvature(4.0), rel=1e-4)
    assert pareto_fd_hessian(4.0, 4.0) == pytest.approx(0.125, rel=1e-4)


def test_hessian_matches_fd_of_dual_gradient():
    for t, th in [(3.0, 4.0), (5.0, 2.8)]:
        fd = central_difference(lambda s: w2_gradient_dual(MODEL, s, th), t, h=1e-4)
        assert w2_hessian_dual(MODEL, t, th) == pytest.approx(fd, rel=1e-5)


def test_derivative_grid():
    rows = derivative_check_grid(MODEL, GRID, GRID)
    assert len(rows) == 25
    for t, th, g, g_fd, hs, h_fd, ok in rows:
        assert ok, (t, th)
        analytic = float(w2sq_pareto_grad(t, th))
        assert abs(g - analytic) <= max(1e-5 * abs(analytic), 1e-9)


def test_second_difference_converges_at_second_order():
    f = lambda t: float(w2sq_pareto(t, 4.0))
    exact = w2_hessian_dual(MODEL, 3.0, 4.0)
    errs = [abs(second_difference(f, 3.0, h) - exact) for h in (1e-2, 5e-3, 2.5e-3)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    for r in ratios:
        assert 3.5 < r < 4.5


@pytest.mark.parametrize("t0", [4.5, 5.0, 6.0])
def test_tail_beyond_a_million_is_negligible(t0):
    assert tail_contribution(MODEL, t0, 4.0) < 1e-12


def test_tail_is_not_negligible_for_heavy_tails():
    # phi grows like x^2 and dp_dt decays like log(x) x^(-t0-1), so the
    # integrand is only O(log(x) x^(-1.5)) at t0 = 2.5
    assert tail_contribution(MODEL, 2.5, 4.0) > 1e-3


def test_family_domain_enforced():
    with pytest.raises(DomainError):
        w2_gradient_dual(MODEL, 2.0, 4.0)
    with pytest.raises(DomainError):
        w2_hessian_dual(MODEL, 3.0, 1.5)
