import math

import numpy as np
import pytest
from scipy import integrate

import oracles
from bvmlab.bayes_opt import (
    RiskProblem,
    golden_section,
    mc_risk,
    minimize_risk,
    nelder_mead,
    project_simplex_chart,
)
from bvmlab.losses import LOSSES, Loss
from bvmlab.posterior import dirichlet_posterior, gamma_posterior
from bvmlab.special import DomainError, RngStream, beta_median

# round-off floor of a flat quadratic risk: |t - m| is resolved only to about
# sqrt(machine eps * risk), so exact identities are checked to this width
FLAT_MIN_TOL = 1e-7


def gamma_draws(size, seed=0):
    return gamma_posterior(5.0, 6.0).sample(size, RngStream(seed))


def test_single_draw_risk_is_the_loss():
    loss = LOSSES["w2"]
    prob = RiskProblem(np.array([0.9]), loss, min_draws=1)
    assert mc_risk(prob, 0.5) == float(loss(0.5, 0.9))


def test_risk_outside_domain_raises():
    prob = RiskProblem(gamma_draws(200), LOSSES["w2"])
    with pytest.raises(DomainError):
        mc_risk(prob, -1.0)


def test_too_few_draws_rejected():
    with pytest.raises(ValueError):
        RiskProblem(np.ones(10), LOSSES["squared"])


def test_w2_risk_matches_quadrature():
    draws = gamma_draws(100_000, seed=1)
    prob = RiskProblem(draws, LOSSES["w2"])
    t = 5.0 / 6.0
    post = gamma_posterior(5.0, 6.0)
    ref, _ = integrate.quad(lambda th: float(LOSSES["w2"](t, th)) * float(post.density(th)),
                            0.0, math.inf, limit=400, epsabs=1e-13)
    vals = LOSSES["w2"](t, draws)
    se = vals.std() / math.sqrt(draws.size)
    assert abs(mc_risk(prob, t) - ref) <= 3.0 * se


def test_squared_loss_gives_draw_mean():
    rng = np.random.default_rng(0)
    for k in range(20):
        draws = rng.normal(rng.uniform(-3, 3), rng.uniform(0.1, 2.0), size=500)
        res = minimize_risk(RiskProblem(draws, LOSSES["squared"]))
        assert res.status == "converged"
        assert abs(res.theta_hat - draws.mean()) <= FLAT_MIN_TOL


def test_abs_loss_gives_sample_median():
    draws = gamma_draws(2001, seed=2)
    res = minimize_risk(RiskProblem(draws, LOSSES["abs"]))
    assert abs(res.theta_hat - np.median(draws)) <= 1e-6
    assert oracles.gamma_median(5.0, 6.0) == pytest.approx(0.7785, abs=5e-5)
    big = gamma_draws(100_001, seed=3)
    res = minimize_risk(RiskProblem(big, LOSSES["abs"]))
    assert abs(res.theta_hat - oracles.gamma_median(5.0, 6.0)) < 5e-3


def test_l1_reparam_gives_marginal_medians():
    post = dirichlet_posterior([5.0, 4.0, 4.0])
    draws = post.sample(200_000, RngStream(4))
    res = minimize_risk(RiskProblem(draws, LOSSES["l1_reparam"]))
    target = [beta_median(5.0, 8.0), beta_median(4.0, 9.0)]
    np.testing.assert_allclose(res.theta_hat, target, atol=1e-3)
    np.testing.assert_allclose(res.theta_hat, np.median(draws, axis=0), atol=1e-4)


def test_same_stream_gives_identical_estimate():
    out = []
    for _ in range(2):
        draws = gamma_posterior(5.0, 6.0).sample(2000, RngStream(9, 1))
        out.append(minimize_risk(RiskProblem(draws, LOSSES["hellinger"])).theta_hat)
    assert out[0] == out[1]
    draws = dirichlet_posterior([5.0, 4.0, 4.0]).sample(5000, RngStream(9, 2))
    a = minimize_risk(RiskProblem(draws, LOSSES["l1_reparam"])).theta_hat
    b = minimize_risk(RiskProblem(draws.copy(), LOSSES["l1_reparam"])).theta_hat
    np.testing.assert_array_equal(a, b)


def test_returned_risk_is_trace_minimum():
    for name in ("hellinger", "kl", "w2"):
        res = minimize_risk(RiskProblem(gamma_draws(2000, seed=5), LOSSES[name]))
        assert all(res.risk <= f for _, f in res.trace)
    draws = dirichlet_posterior([5.0, 4.0, 4.0]).sample(5000, RngStream(6))
    res = minimize_risk(RiskProblem(draws, LOSSES["l1_reparam"]))
    assert all(res.risk <= f for _, f in res.trace)


def test_golden_section_quadratic():
    x, fx, status = golden_section(lambda t: (t - 5.0) ** 2, 0.0, 10.0, tol=1e-9)
    assert status == "converged"
    assert abs(x - 5.0) <= 1e-9
    loss = Loss("shifted", 1, lambda t, th: (np.asarray(t) - 5.0) ** 2 + 0.0 * np.asarray(th),
                domain=(0.0, 10.0))
    res = minimize_risk(RiskProblem(np.linspace(0.5, 9.5, 200), loss))
    assert abs(res.theta_hat - 5.0) <= 1e-8


def test_golden_section_reports_iteration_limit():
    _, _, status = golden_section(lambda t: (t - 1.0) ** 2, 0.0, 10.0, tol=1e-12, max_iter=5)
    assert status == "max_iter"


def test_nelder_mead_quadratic_and_projection():
    x, fx, status, _ = nelder_mead(lambda z: float(np.sum((z - [0.3, -0.2]) ** 2)), np.zeros(2),
                                   step=0.1, tol=1e-10)
    assert status == "converged"
    np.testing.assert_allclose(x, [0.3, -0.2], atol=1e-8)
    # target outside the chart: the projected search ends on the boundary
    x, *_ = nelder_mead(lambda z: float(np.sum((z - [0.8, 0.8]) ** 2)), np.array([0.2, 0.2]),
                        step=0.05, tol=1e-10, project=project_simplex_chart)
    np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-6)


def test_simplex_chart_projection():
    np.testing.assert_array_equal(project_simplex_chart([-0.1, 0.3]), [0.0, 0.3])
    np.testing.assert_allclose(project_simplex_chart([0.75, 0.75]), [0.5, 0.5])


def test_boundary_draws_are_clamped_and_counted():
    draws = np.r_[np.full(5, 2.0), np.linspace(2.5, 5.0, 200)]
    prob = RiskProblem(draws, LOSSES["w2_pareto"], domain=(2.05, math.inf), margin=1e-3)
    assert prob.clamped == 5
    assert np.all(prob.draws > 2.051)
    res = minimize_risk(prob)
    assert prob.contains(res.theta_hat)


def test_simplex_draws_validated():
    bad = np.full((200, 2), 0.6)
    with pytest.raises(DomainError):
        RiskProblem(bad, LOSSES["l1_reparam"])

