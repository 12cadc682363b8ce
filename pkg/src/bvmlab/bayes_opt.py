"""Bayes estimators as minimizers of Monte Carlo posterior risk.

A :class:`RiskProblem` holds one fixed set of posterior draws, so the risk
surface seen by the optimizer is a deterministic function of t (common random
numbers across all evaluations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .losses import Loss
from .special import DomainError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class RiskProblem:
    """Posterior draws, a loss and a search domain.

    ``domain`` is ``(lo, hi)`` for a 1-D box or ``"simplex"`` for the
    (d-1)-coordinate chart {a >= 0, sum a <= 1}. ``margin`` shrinks a box
    domain so the loss is never evaluated at a singular boundary.
    """

    draws: np.ndarray
    loss: Loss
    domain: object = None
    margin: float = 0.0
    tol: float = 1e-9
    simplex_tol: float = 1e-8
    max_iter: int = 5000
    min_draws: int = 100
    clamped: int = field(default=0, init=False)

    def __post_init__(self):
        # contiguous storage: strided views double the cost of every risk evaluation
        draws = np.ascontiguousarray(self.draws, dtype=float)
        if draws.shape[0] < self.min_draws:
            raise ValueError(f"need at least {self.min_draws} posterior draws, got {draws.shape[0]}")
        if self.domain is None:
            self.domain = self.loss.domain
        if isinstance(self.domain, str):
            if self.domain != "simplex":
                raise ValueError(f"unknown domain {self.domain!r}")
            draws = np.atleast_2d(draws)
            if not self.loss.in_domain(draws):
                raise DomainError("posterior draws fall outside the simplex chart")
        else:
            lo, hi = self.domain
            lo_m, hi_m = lo + self.margin, hi - self.margin
            bad = (draws <= lo_m) | (draws >= hi_m)
            self.clamped = int(np.count_nonzero(bad))
            if self.clamped:
                eps = 1e-12 * max(1.0, abs(lo_m), abs(hi_m) if math.isfinite(hi_m) else 1.0)
                draws = np.clip(draws, lo_m + eps, hi_m - eps if math.isfinite(hi_m) else np.inf)
            self.domain = (lo_m, hi_m)
        self.draws = draws

    @property
    def is_simplex(self) -> bool:
        return isinstance(self.domain, str)

    @property
    def dim(self) -> int:
        return self.draws.shape[1] if self.draws.ndim == 2 else 1

    def contains(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        if self.is_simplex:
            return bool(np.all(t >= 0.0) and t.sum() <= 1.0 + 1e-12)
        lo, hi = self.domain
        return bool(lo < float(t) < hi)


def mc_risk(problem: RiskProblem, t) -> float:
    """(1/S) sum_s loss(t, draw_s) over the problem's stored draws."""
    if not problem.contains(t):
        raise DomainError(f"t = {t} lies outside the search domain")
    if problem.loss.risk is not None:
        return problem.loss.risk(t, problem.draws)
    return float(np.mean(problem.loss(t, problem.draws)))


@dataclass
class OptResult:
    theta_hat: object
    risk: float
    status: str
    trace: list
    evaluations: int


# ---------------------------------------------------------------------------
# one dimension


def golden_section(f, a: float, b: float, tol: float = 1e-9, max_iter: int = 500, trace=None):
    """Golden-section search on [a, b] until the bracket width is <= tol.

    Returns ``(x, fx, status)`` where x is the best evaluated point, the final
    bracket midpoint included.
    """
    trace = [] if trace is None else trace

    def ev(x):
        fx = f(x)
        trace.append((x, fx))
        return fx

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = ev(c), ev(d)
    status = "max_iter"
    for _ in range(max_iter):
        if b - a <= tol:
            status = "converged"
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = ev(d)
    if b - a <= tol:
        status = "converged"
    ev(0.5 * (a + b))
    x, fx = min(trace, key=lambda p: p[1])
    return x, fx, status


def _minimize_1d(problem: RiskProblem, n_grid: int = 201) -> OptResult:
    lo, hi = problem.domain
    d = problem.draws.ravel()
    a = max(float(d.min()), lo)
    b = min(float(d.max()), hi)
    if a >= b:
        x = float(a)
        return OptResult(x, mc_risk(problem, x), "degenerate", [(x, mc_risk(problem, x))], 1)
    trace = []
    grid = np.linspace(a, b, n_grid)
    # keep the scan strictly inside an open domain
    grid = grid[(grid > lo) & (grid < hi)]
    vals = [mc_risk(problem, g) for g in grid]
    trace.extend(zip(grid.tolist(), vals))
    i = int(np.argmin(vals))
    left = grid[max(i - 1, 0)]
    right = grid[min(i + 1, grid.size - 1)]
    x, fx, status = golden_section(
        lambda t: mc_risk(problem, t), float(left), float(right),
        tol=problem.tol, max_iter=problem.max_iter, trace=trace,
    )
    return OptResult(float(x), float(fx), status, trace, len(trace))


# ---------------------------------------------------------------------------
# several dimensions


def project_simplex_chart(a) -> np.ndarray:
    """Clamp negatives to zero, then rescale onto sum = 1 if the sum exceeds one."""
    a = np.maximum(np.asarray(a, dtype=float), 0.0)
    s = a.sum()
    if s > 1.0:
        a = a / s
    return a


def nelder_mead(f, x0, step=0.05, tol: float = 1e-8, max_iter: int = 5000,
                project=None, trace=None):
    """Nelder-Mead with an optional projection applied to every trial point.

    Stops when the simplex diameter (max vertex distance to the best vertex)
    is <= tol. Returns ``(x, fx, status, evaluations)``.
    """
    trace = [] if trace is None else trace
    proj = (lambda z: z) if project is None else project

    def ev(x):
        x = proj(x)
        fx = f(x)
        trace.append((x.copy(), fx))
        return x, fx

    x0 = np.asarray(x0, dtype=float)
    k = x0.size
    pts = [ev(x0)]
    for i in range(k):
        e = np.zeros(k)
        e[i] = step
        y = x0 + e
        if np.allclose(proj(y), pts[0][0]):
            y = x0 - e
        pts.append(ev(y))
    status = "max_iter"
    for _ in range(max_iter):
        pts.sort(key=lambda p: p[1])
        best = pts[0][0]
        diam = max(np.linalg.norm(p[0] - best) for p in pts[1:])
        if diam <= tol:
            status = "converged"
            break
        centroid = np.mean([p[0] for p in pts[:-1]], axis=0)
        worst, f_worst = pts[-1]
        xr, fr = ev(centroid + (centroid - worst))
        if fr < pts[0][1]:
            xe, fe = ev(centroid + 2.0 * (centroid - worst))
            pts[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < pts[-2][1]:
            pts[-1] = (xr, fr)
        else:
            if fr < f_worst:
                xc, fc = ev(centroid + 0.5 * (xr - centroid))
                accept = fc <= fr
            else:
                xc, fc = ev(centroid + 0.5 * (worst - centroid))
                accept = fc < f_worst
            if accept:
                pts[-1] = (xc, fc)
            else:
                b0 = pts[0][0]
                pts = [pts[0]] + [ev(b0 + 0.5 * (p[0] - b0)) for p in pts[1:]]
    x, fx = min(trace, key=lambda p: p[1])
    return x, fx, status, len(trace)


def _minimize_nd(problem: RiskProblem, restarts: int = 3) -> OptResult:
    proj = project_simplex_chart if problem.is_simplex else None
    trace = []
    x = np.mean(problem.draws, axis=0)
    if proj is not None:
        x = proj(x)
    # initial simplex on the scale of the posterior spread
    step = float(np.clip(np.max(np.std(problem.draws, axis=0)), 1e-4, 0.05))
    status = "max_iter"
    evals = 0
    best_f = math.inf
    for _ in range(restarts + 1):
        x_new, f_new, status, ne = nelder_mead(
            lambda t: mc_risk(problem, t), x, step=step, tol=problem.simplex_tol,
            max_iter=problem.max_iter, project=proj, trace=trace,
        )
        evals += ne
        improved = f_new < best_f - 1e-15
        x, best_f = (x_new, f_new) if f_new <= best_f else (x, best_f)
        if not improved:
            break
        # restart from the best point with a smaller simplex
        step = max(step * 0.1, 1e-4)
    x, fx = min(trace, key=lambda p: p[1])
    return OptResult(np.asarray(x), float(fx), status, trace, evals)


def minimize_risk(problem: RiskProblem) -> OptResult:
    """Minimize the Monte Carlo risk; the result carries status and the full trace.

    1-D: grid scan over the range of the draws, then golden section on the
    bracket around the best grid point. Several dimensions: Nelder-Mead with
    restarts, projected onto the simplex chart when the domain is a simplex.
    """
    if problem.dim == 1 and not problem.is_simplex:
        return _minimize_1d(problem)
    return _minimize_nd(problem)
