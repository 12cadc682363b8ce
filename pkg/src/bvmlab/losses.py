"""Loss functions on parameter space: closed forms, gradients and local limits.

Every loss is vectorized in its second argument so that a posterior risk can
be evaluated against a whole array of posterior draws at once. Scalar
parameters are 1-D losses; vector parameters broadcast over leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .special import (
    DomainError,
    SymMat2,
    exp_e1_scaled,
    normal_cdf,
    normal_pdf,
    spd2_sqrt,
)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class QuadExpansion:
    """Local expansion loss(t, theta) = <t - theta, A(theta)(t - theta)> + xi(t, theta).

    The remainder is defined as the difference, so the identity holds exactly.
    """

    A: Callable
    loss: Callable

    def quadratic_part(self, t, theta):
        t = np.asarray(t, dtype=float)
        theta = np.asarray(theta, dtype=float)
        diff = t - theta
        if diff.ndim == 0 or np.ndim(self.A(theta)) < 2:
            return np.squeeze(self.A(theta)) * diff * diff
        a = np.atleast_2d(self.A(theta))
        return float(diff @ a @ diff)

    def xi(self, t, theta):
        return self.loss(t, theta) - self.quadratic_part(t, theta)


@dataclass(frozen=True)
class Loss:
    """A loss on Theta x Theta.

    ``domain`` is the box ``(lo, hi)`` every coordinate must lie in, or the
    string ``"simplex"`` for the (d-1)-coordinate multinomial chart.
    ``local_order`` is the exponent p of the local bound c1|t-theta|^p <= loss
    <= c2|t-theta|^p.
    """

    name: str
    dim: int
    fn: Callable
    domain: object = (-math.inf, math.inf)
    local_order: float = 2.0
    grad: Optional[Callable] = None
    quad: Optional[QuadExpansion] = None
    limit: Optional[Callable] = None
    # optional mean of the loss over an (S, d) array of pre-validated draws
    risk: Optional[Callable] = None

    def __call__(self, t, theta):
        return self.fn(t, theta)

    def grad_t(self, t, theta):
        if self.grad is None:
            raise NotImplementedError(f"{self.name} has no analytic gradient")
        return self.grad(t, theta)

    def local_limit(self, t, h, theta0):
        """Rescaled limit loss_0(t, h) = lim loss(theta0 + e t, theta0 + e h) / e^p."""
        if self.limit is not None:
            return self.limit(t, h, theta0)
        if self.quad is not None:
            return _quad_limit(self.quad, t, h, theta0)
        raise NotImplementedError(f"{self.name} has no local limit")

    def in_domain(self, t) -> bool:
        try:
            _check_domain(self.domain, t, self.name)
        except DomainError:
            return False
        return True


def _quad_limit(quad: QuadExpansion, t, h, theta0):
    diff = np.asarray(t, dtype=float) - np.asarray(h, dtype=float)
    a = quad.A(np.asarray(theta0, dtype=float))
    if diff.ndim == 0:
        return float(np.squeeze(a)) * float(diff) ** 2
    return float(diff @ np.atleast_2d(a) @ diff)


def _check_domain(domain, x, name):
    x = np.asarray(x, dtype=float)
    if isinstance(domain, str):
        if domain != "simplex":
            raise ValueError(f"unknown domain {domain!r}")
        s = x.sum(axis=-1) if x.ndim else x
        if np.any(x < -1e-12) or np.any(s > 1.0 + 1e-12):
            raise DomainError(f"{name}: argument outside the simplex chart")
        return
    lo, hi = domain
    if np.any(~(x > lo)) or np.any(~(x < hi)):
        raise DomainError(f"{name}: argument outside ({lo}, {hi})")


# ---------------------------------------------------------------------------
# exponential family losses


def _pos(name, *xs):
    for x in xs:
        if np.any(~(np.asarray(x, dtype=float) > 0.0)):
            raise DomainError(f"{name} requires positive arguments")


def hellinger_exp(t, theta):
    """Squared Hellinger distance between Exp(t) and Exp(theta)."""
    _pos("hellinger_exp", t, theta)
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return 1.0 - 2.0 * np.sqrt(t * theta) / (t + theta)


def _hellinger_exp_grad(t, theta):
    _pos("hellinger_exp", t, theta)
    return np.sqrt(theta) * (t - theta) / (np.sqrt(t) * (t + theta) ** 2)


def w2sq_exp(t, theta):
    """Squared 2-Wasserstein distance between Exp(t) and Exp(theta)."""
    _pos("w2sq_exp", t, theta)
    return 2.0 * (1.0 / np.asarray(t, dtype=float) - 1.0 / np.asarray(theta, dtype=float)) ** 2


def _w2sq_exp_grad(t, theta):
    _pos("w2sq_exp", t, theta)
    return -4.0 * (1.0 / t - 1.0 / np.asarray(theta, dtype=float)) / t**2


def kl_exp(t, theta):
    """KL(Exp(theta) | Exp(t))."""
    _pos("kl_exp", t, theta)
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.log(theta) - np.log(t) + t / theta - 1.0


def _kl_exp_grad(t, theta):
    _pos("kl_exp", t, theta)
    return -1.0 / t + 1.0 / np.asarray(theta, dtype=float)


def stein_variance(t, theta):
    """Stein's loss theta/t - log(theta/t) - 1 for a variance parameter."""
    _pos("stein_variance", t, theta)
    r = np.asarray(theta, dtype=float) / np.asarray(t, dtype=float)
    return r - np.log(r) - 1.0


def _stein_grad(t, theta):
    _pos("stein_variance", t, theta)
    return -np.asarray(theta, dtype=float) / t**2 + 1.0 / t


# ---------------------------------------------------------------------------
# Pareto squared W2


def _pareto_args(t, theta):
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(~(t > 2.0)) or np.any(~(theta > 2.0)):
        raise DomainError("w2sq_pareto requires shapes > 2")
    return t, theta


def w2sq_pareto(t, theta):
    """Squared W2 between Pareto(1, t) and Pareto(1, theta)."""
    t, theta = _pareto_args(t, theta)
    return 2.0 * (t - theta) ** 2 / ((t * theta - t - theta) * (t - 2.0) * (theta - 2.0))


def w2sq_pareto_grad(t, theta):
    t, theta = _pareto_args(t, theta)
    return (
        2.0 * (t - theta) * ((2.0 * theta - 1.0) * t - 3.0 * theta)
        / ((t - 2.0) ** 2 * ((theta - 1.0) * t - theta) ** 2)
    )


def pareto_curvature(theta):
    """Second t-derivative of w2sq_pareto at t = theta: 4 / (theta (theta-2)^3)."""
    _, theta = _pareto_args(3.0, theta)
    return 4.0 / (theta * (theta - 2.0) ** 3)


def pareto_xi_closed(t, theta):
    """Remainder of the quadratic expansion, written out in closed form."""
    t, theta = _pareto_args(t, theta)
    g = t * theta - t - theta
    num = theta * (theta - 2.0) ** 2 - (t - 2.0) * g
    den = (t - 2.0) * (theta - 2.0) ** 3 * theta * g
    return 2.0 * (t - theta) ** 2 * num / den


# ---------------------------------------------------------------------------
# Gaussian total variation


def _mahalanobis(t, theta, cov):
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    diff = t - theta
    if diff.ndim == 0:
        var = 1.0 if cov is None else float(np.squeeze(cov))
        return np.abs(diff) / math.sqrt(var)
    if cov is None:
        return np.sqrt(np.sum(diff * diff, axis=-1))
    prec = np.linalg.inv(np.atleast_2d(cov))
    if prec.shape[0] != diff.shape[-1]:
        raise ValueError("dimension mismatch between locations and covariance")
    return np.sqrt(np.einsum("...i,ij,...j->...", diff, prec, diff))


def tv_gauss_location(t, theta, cov=None):
    """L1 distance between the densities of N(t, cov) and N(theta, cov)."""
    t_arr = np.asarray(t, dtype=float)
    th_arr = np.asarray(theta, dtype=float)
    if t_arr.ndim and th_arr.ndim and t_arr.shape[-1] != th_arr.shape[-1]:
        raise ValueError("dimension mismatch")
    delta = _mahalanobis(t_arr, th_arr, cov)
    return 2.0 * (2.0 * normal_cdf(0.5 * delta) - 1.0)


def _tv_grad(t, theta, cov=None):
    t = np.asarray(t, dtype=float)
    delta = _mahalanobis(t, theta, cov)
    if np.any(delta == 0.0):
        raise DomainError("TV loss is not differentiable at t = theta")
    diff = t - np.asarray(theta, dtype=float)
    if diff.ndim == 0:
        var = 1.0 if cov is None else float(np.squeeze(cov))
        return 2.0 * normal_pdf(0.5 * delta) * diff / (var * delta)
    prec = np.eye(diff.shape[-1]) if cov is None else np.linalg.inv(np.atleast_2d(cov))
    return 2.0 * normal_pdf(0.5 * delta)[..., None] * (diff @ prec) / delta[..., None]


def tv_gauss_local_limit(t, h, theta0=None, cov=None):
    """sqrt(2/pi) times the (Mahalanobis) norm of t - h."""
    return SQRT_2_OVER_PI * _mahalanobis(t, h, cov)


# ---------------------------------------------------------------------------
# Gompertz W1

_scaled_e1 = np.vectorize(exp_e1_scaled, otypes=[float])


def w1_gompertz(t, theta):
    """W1 between Gompertz laws: |e^theta E1(theta) - e^t E1(t)|."""
    _pos("w1_gompertz", t, theta)
    return np.abs(_scaled_e1(theta) - _scaled_e1(t))


def _w1_gompertz_grad(t, theta):
    _pos("w1_gompertz", t, theta)
    g_t = _scaled_e1(t)
    diff = _scaled_e1(theta) - g_t
    if np.any(diff == 0.0):
        raise DomainError("W1 Gompertz loss is not differentiable at t = theta")
    # d/ds e^s E1(s) = e^s E1(s) - 1/s
    return -np.sign(diff) * (g_t - 1.0 / np.asarray(t, dtype=float))


def gompertz_cdf_slope(theta0):
    """L1 norm of the parameter derivative of the Gompertz CDF: 1/theta - e^theta E1(theta)."""
    _pos("gompertz_cdf_slope", theta0)
    return 1.0 / theta0 - exp_e1_scaled(theta0)


# ---------------------------------------------------------------------------
# multinomial


def _simplex_full(p, name):
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or np.any(np.abs(p.sum(axis=-1) - 1.0) > 1e-9):
        raise DomainError(f"{name}: argument is not a probability vector")
    return p


def w2sq_multinomial(p, theta):
    """Squared W2 between Mult(1, p) and Mult(1, theta) on the unit vectors."""
    p = _simplex_full(p, "w2sq_multinomial")
    theta = _simplex_full(theta, "w2sq_multinomial")
    return 1.0 - np.minimum(p, theta).sum(axis=-1)


def _l1_reparam_risk(a, draws):
    # same value as l1_reparam(a, draws).mean(), summed in one pass
    a = np.asarray(a, dtype=float)
    _check_domain("simplex", a, "l1_reparam")
    diff = np.subtract(draws, a)
    np.abs(diff, out=diff)
    return float(diff.sum()) / draws.shape[0]


def l1_reparam(a, b):
    """The l1 loss sum_i |a_i - b_i| on the (d-1)-coordinate simplex chart."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_domain("simplex", a, "l1_reparam")
    _check_domain("simplex", b, "l1_reparam")
    return np.abs(a - b).sum(axis=-1)


# ---------------------------------------------------------------------------
# Sinkhorn divergence between bivariate Gaussians


def _as_sym(m) -> SymMat2:
    return m if isinstance(m, SymMat2) else SymMat2.from_array(m)


def sinkhorn_gauss2(mu, sigma1, nu, sigma2, lam):
    """Entropic transport cost between N2(mu, sigma1) and N2(nu, sigma2), closed form.

    The constant in the log term corresponds to regularizing with the
    differential entropy of the coupling; self-terms are therefore nonzero.
    """
    if not lam > 0.0:
        raise DomainError("regularization must be positive")
    s1 = _as_sym(sigma1)
    s2 = _as_sym(sigma2)
    if not (s1.is_spd() and s2.is_spd()):
        raise DomainError("covariances must be SPD")
    c = lam / 4.0
    r1 = spd2_sqrt(s1).to_array()
    r1_inv = np.linalg.inv(r1)
    inner = SymMat2.from_array(r1 @ s2.to_array() @ r1 + c * c * np.eye(2))
    f = r1_inv @ spd2_sqrt(inner).to_array() @ r1_inv - c * s1.inverse().to_array()
    m = s1.to_array() @ f
    diff = np.asarray(mu, dtype=float) - np.asarray(nu, dtype=float)
    log_arg = (2.0 * math.pi * math.e) ** 4 * lam**2 / 4.0 * np.linalg.det(m)
    return (
        float(diff @ diff) + s1.trace + s2.trace - 2.0 * float(np.trace(m))
        - 0.5 * lam * math.log(log_arg)
    )


def sinkhorn_centered(params_t, params_theta, lam):
    """Centered divergence S(P,Q) - S(P,P)/2 - S(Q,Q)/2 for params = (mean, cov)."""
    mu, s1 = params_t
    nu, s2 = params_theta
    return (
        sinkhorn_gauss2(mu, s1, nu, s2, lam)
        - 0.5 * sinkhorn_gauss2(mu, s1, mu, s1, lam)
        - 0.5 * sinkhorn_gauss2(nu, s2, nu, s2, lam)
    )


def gaussian_w2sq(mu, sigma1, nu, sigma2):
    """Squared W2 between bivariate Gaussians (Bures formula)."""
    s1 = _as_sym(sigma1)
    s2 = _as_sym(sigma2)
    r1 = spd2_sqrt(s1).to_array()
    cross = spd2_sqrt(SymMat2.from_array(r1 @ s2.to_array() @ r1))
    diff = np.asarray(mu, dtype=float) - np.asarray(nu, dtype=float)
    return float(diff @ diff) + s1.trace + s2.trace - 2.0 * cross.trace


def unpack_gauss2(vec):
    """(mu1, mu2, s11, s12, s22) -> (mean, SymMat2)."""
    v = np.asarray(vec, dtype=float)
    return v[:2], SymMat2(v[2], v[3], v[4])


# ---------------------------------------------------------------------------
# registry


def _abs_loss(t, theta):
    return np.abs(np.asarray(t, dtype=float) - np.asarray(theta, dtype=float))


def _sq_loss(t, theta):
    diff = np.asarray(t, dtype=float) - np.asarray(theta, dtype=float)
    return diff * diff if diff.ndim <= 1 and np.ndim(t) == 0 else np.sum(diff * diff, axis=-1)


def _sq_grad(t, theta):
    return 2.0 * (np.asarray(t, dtype=float) - np.asarray(theta, dtype=float))


def _make_sinkhorn_loss(lam: float) -> Loss:
    def fn(t, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 1:
            return sinkhorn_centered(unpack_gauss2(t), unpack_gauss2(theta), lam)
        return np.array([sinkhorn_centered(unpack_gauss2(t), unpack_gauss2(th), lam) for th in theta])

    return Loss(name=f"sinkhorn[{lam:g}]", dim=5, fn=fn, local_order=2.0)


def _build_registry() -> dict:
    pos = (0.0, math.inf)
    reg = {
        "hellinger": Loss(
            "hellinger", 1, hellinger_exp, pos, 2.0, _hellinger_exp_grad,
            QuadExpansion(lambda th: 1.0 / (8.0 * np.asarray(th) ** 2), hellinger_exp),
        ),
        "w2": Loss(
            "w2", 1, w2sq_exp, pos, 2.0, _w2sq_exp_grad,
            QuadExpansion(lambda th: 2.0 / np.asarray(th) ** 4, w2sq_exp),
        ),
        "kl": Loss(
            "kl", 1, kl_exp, pos, 2.0, _kl_exp_grad,
            QuadExpansion(lambda th: 1.0 / (2.0 * np.asarray(th) ** 2), kl_exp),
        ),
        "stein": Loss(
            "stein", 1, stein_variance, pos, 2.0, _stein_grad,
            QuadExpansion(lambda th: 1.0 / (2.0 * np.asarray(th) ** 2), stein_variance),
        ),
        "w2_pareto": Loss(
            "w2_pareto", 1, w2sq_pareto, (2.0, math.inf), 2.0, w2sq_pareto_grad,
            QuadExpansion(lambda th: 0.5 * pareto_curvature(th), w2sq_pareto),
        ),
        "tv_gauss": Loss(
            "tv_gauss", 1, tv_gauss_location, (-math.inf, math.inf), 1.0, _tv_grad,
            limit=lambda t, h, th0: tv_gauss_local_limit(t, h),
        ),
        "w1_gompertz": Loss(
            "w1_gompertz", 1, w1_gompertz, pos, 1.0, _w1_gompertz_grad,
            limit=lambda t, h, th0: abs(float(t) - float(h)) * gompertz_cdf_slope(th0),
        ),
        "l1_reparam": Loss(
            "l1_reparam", 2, l1_reparam, "simplex", 1.0,
            limit=lambda t, h, th0: float(np.abs(np.asarray(t, float) - np.asarray(h, float)).sum()),
            risk=_l1_reparam_risk,
        ),
        "squared": Loss("squared", 1, _sq_loss, (-math.inf, math.inf), 2.0, _sq_grad,
                        QuadExpansion(lambda th: np.ones_like(np.asarray(th, float)), _sq_loss)),
        "abs": Loss("abs", 1, _abs_loss, (-math.inf, math.inf), 1.0,
                    limit=lambda t, h, th0: abs(float(t) - float(h))),
    }
    return reg


LOSSES = _build_registry()

# the three intrinsic losses of the exponential-gamma experiment
INTRINSIC_EXP_LOSSES = ("hellinger", "w2", "kl")


def get_loss(name: str, **kwargs) -> Loss:
    if name.startswith("sinkhorn"):
        return _make_sinkhorn_loss(float(kwargs.get("lam", 1.0)))
    try:
        return LOSSES[name]
    except KeyError:
        raise KeyError(f"unknown loss {name!r}; known: {sorted(LOSSES)}") from None


# ---------------------------------------------------------------------------
# numerical diagnostics of the local and global shape of a loss


def local_ratio_range(loss: Loss, theta0: float, radius: float, n_grid: int = 81):
    """Min and max of loss(t, theta) / |t - theta|^p over t != theta in B_radius(theta0)."""
    pts = np.linspace(theta0 - radius, theta0 + radius, n_grid)
    t, th = np.meshgrid(pts, pts, indexing="ij")
    mask = t != th
    ratio = loss(t[mask], th[mask]) / np.abs(t[mask] - th[mask]) ** loss.local_order
    return float(ratio.min()), float(ratio.max())


def separation_infimum(loss: Loss, theta0, m: float, delta: float, t_grid, n_theta: int = 21):
    """Grid infimum of loss(t, theta) over |t - theta0| > m and |theta - theta0| <= delta."""
    theta0 = float(theta0)
    t_grid = np.asarray(t_grid, dtype=float)
    far = t_grid[np.abs(t_grid - theta0) > m]
    if far.size == 0:
        return math.inf
    near = np.linspace(theta0 - delta, theta0 + delta, n_theta)
    t, th = np.meshgrid(far, near, indexing="ij")
    return float(np.min(loss(t.ravel(), th.ravel())))
