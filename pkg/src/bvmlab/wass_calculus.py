"""Parameter derivatives of W2^2 through Kantorovich potentials and transport maps.

For a 1-D family on (1, inf) with densities p_t, CDFs F_t, optimal map
T = T_t^theta and dual potential phi = phi_t^theta:

    d/dt W2^2(P_t, P_theta)   = int phi(x) d/dt p_t(x) dx
    d2/dt2 W2^2(P_t, P_theta) = 2 ( int (T(x) - x) d2/dt2 F_t(x) dx
                                   + int T'(x) (d/dt F_t(x))^2 / p_t(x) dx )

Integrals over x in (1, inf) are computed in the variable s = log x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .families import ParametricFamily, pareto_shape_family
from .losses import w2sq_pareto
from .special import DomainError

# upper end of the s-range; chosen per call so that x^k stays finite
_LOG_MAX = 700.0


@dataclass(frozen=True)
class DualPotentialModel:
    family: ParametricFamily
    phi: Callable          # phi(t, theta, x, C=0.0)
    transport: Callable    # T(t, theta, x)
    dtransport_dx: Callable
    dp_dt: Callable        # (t, x)
    dF_dt: Callable        # (t, x)
    d2F_dt2: Callable      # (t, x)
    growth: Callable       # (t, theta) -> largest power of x appearing in any integrand factor
    dtransport_dt: Callable | None = None


def _x_check(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 1.0)):
        raise DomainError("Pareto model is defined for x > 1")
    return x


def pareto_dual_model() -> DualPotentialModel:
    """Pareto(1, t) shape family with explicit potential, map and derivatives."""
    fam = pareto_shape_family()

    def phi(t, theta, x, C=0.0):
        x = _x_check(x)
        k = 2.0 * theta / (t + theta)
        return C + x * x - 1.0 + k * (1.0 - x ** (1.0 + t / theta))

    def transport(t, theta, x):
        return _x_check(x) ** (t / theta)

    def dtransport_dx(t, theta, x):
        x = _x_check(x)
        return (t / theta) * x ** (t / theta - 1.0)

    def dtransport_dt(t, theta, x):
        x = _x_check(x)
        return np.log(x) * x ** (t / theta) / theta

    def dp_dt(t, x):
        x = _x_check(x)
        return -(np.log(x) * t - 1.0) * x ** (-t - 1.0)

    def dF_dt(t, x):
        x = _x_check(x)
        return np.log(x) * x ** (-t)

    def d2F_dt2(t, x):
        # F_t = 1 - x^(-t), so the second t-derivative is -log(x)^2 x^(-t)
        x = _x_check(x)
        return -np.log(x) ** 2 * x ** (-t)

    def growth(t, theta):
        return max(2.0, 1.0 + t / theta)

    return DualPotentialModel(
        family=fam, phi=phi, transport=transport, dtransport_dx=dtransport_dx,
        dp_dt=dp_dt, dF_dt=dF_dt, d2F_dt2=d2F_dt2, growth=growth,
        dtransport_dt=dtransport_dt,
    )


def _s_max(model: DualPotentialModel, t, theta) -> float:
    return min(_LOG_MAX / model.growth(t, theta), 300.0)


def _quad_s(f, a: float, b: float) -> float:
    # split the half-line so each piece is resolved by the adaptive rule
    edges = [a] + [e for e in (1.0, 5.0, 20.0, 60.0) if a < e < b] + [b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=500)
        if not math.isfinite(val):
            raise FloatingPointError(f"quadrature diverged on [{lo}, {hi}] (estimate {val}, error {err})")
        total += val
    return total


def _gradient_integrand(model, t, theta, C):
    def f(s):
        x = math.exp(s)
        return float(model.phi(t, theta, x, C) * model.dp_dt(t, x)) * x
    return f


def _hessian_integrands(model, t, theta):
    def first(s):
        x = math.exp(s)
        return float((model.transport(t, theta, x) - x) * model.d2F_dt2(t, x)) * x

    def second(s):
        x = math.exp(s)
        dens = float(model.family.density(x, t))
        if dens == 0.0:
            return 0.0
        return float(model.dtransport_dx(t, theta, x) * model.dF_dt(t, x) ** 2) / dens * x

    return first, second


def w2_gradient_dual(model: DualPotentialModel, t0: float, theta: float, C: float = 0.0) -> float:
    """int phi_{t0}^theta(x) d/dt p_t(x)|_{t=t0} dx by quadrature."""
    model.family.check(t0)
    model.family.check(theta)
    f = _gradient_integrand(model, t0, theta, C)
    return _quad_s(f, 1e-300, _s_max(model, t0, theta))


def w2_hessian_dual(model: DualPotentialModel, t0: float, theta: float) -> float:
    """2 (int (T - x) d2F dx + int T' (dF)^2 / p dx) by quadrature."""
    model.family.check(t0)
    model.family.check(theta)
    first, second = _hessian_integrands(model, t0, theta)
    top = _s_max(model, t0, theta)
    return 2.0 * (_quad_s(first, 1e-300, top) + _quad_s(second, 1e-300, top))


def tail_contribution(model: DualPotentialModel, t0: float, theta: float,
                      x0: float = 1e6, C: float = 0.0) -> float:
    """int_{x0}^inf |gradient integrand| dx: the part of the gradient beyond x0."""
    f = _gradient_integrand(model, t0, theta, C)
    return _quad_s(lambda s: abs(f(s)), math.log(x0), _s_max(model, t0, theta))


# ---------------------------------------------------------------------------
# finite-difference oracles


def central_difference(f, x: float, h: float = 1e-6) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def second_difference(f, x: float, h: float = 1e-4) -> float:
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def pareto_fd_gradient(t0: float, theta: float, h: float = 1e-6) -> float:
    return central_difference(lambda t: float(w2sq_pareto(t, theta)), t0, h)


def pareto_fd_hessian(t0: float, theta: float, h: float = 1e-4) -> float:
    return second_difference(lambda t: float(w2sq_pareto(t, theta)), t0, h)


def derivative_check_grid(model: DualPotentialModel, t_values, theta_values,
                          grad_rtol: float = 1e-5, hess_rtol: float = 1e-4,
                          grad_atol: float = 1e-9):
    """Rows (t0, theta, grad_dual, grad_fd, hess_dual, hess_fd, ok) over a grid.

    At t0 = theta the gradient vanishes, so it is compared absolutely there
    (``grad_atol`` covers the round-off of the finite difference).
    """
    rows = []
    for t0 in t_values:
        for th in theta_values:
            g = w2_gradient_dual(model, t0, th)
            g_fd = pareto_fd_gradient(t0, th)
            hs = w2_hessian_dual(model, t0, th)
            h_fd = pareto_fd_hessian(t0, th)
            ok = (abs(g - g_fd) <= max(grad_rtol * abs(g_fd), grad_atol)
                  and abs(hs - h_fd) <= hess_rtol * abs(h_fd))
            rows.append((float(t0), float(th), g, g_fd, hs, h_fd, bool(ok)))
    return rows
