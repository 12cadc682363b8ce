"""Discrete optimal transport: a dense simplex solver, the multinomial barycenter
LP and its dual, transport plans, and exact empirical W2 distances."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .special import DomainError

_TOL = 1e-11


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class StandardLP:
    """min c^T x subject to A x = b, x >= 0."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape != (b.size, c.size):
            raise ValueError(f"inconsistent LP shapes: A {A.shape}, b {b.size}, c {c.size}")
        if not np.all(np.isfinite(b)):
            raise ValueError("rhs must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def shape(self):
        return self.A.shape


@dataclass
class LPResult:
    x: np.ndarray | None
    objective: float
    status: LPStatus
    basis_path: list = field(default_factory=list)

    def __iter__(self):
        # allows ``x, obj, status = simplex_solve(lp)``
        return iter((self.x, self.objective, self.status))


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])


def _run_simplex(T, basis, n_cols, allowed, path, max_iter):
    """Bland's rule on tableau T whose last row is the reduced-cost row."""
    m = T.shape[0] - 1
    for _ in range(max_iter):
        red = T[-1, :n_cols]
        enter = -1
        for j in range(n_cols):
            if allowed[j] and red[j] < -1e-10:
                enter = j
                break
        if enter < 0:
            return LPStatus.OPTIMAL
        col = T[:m, enter]
        best_row, best_ratio = -1, math.inf
        for i in range(m):
            if col[i] > 1e-10:
                ratio = T[i, -1] / col[i]
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12 and basis[i] < basis[best_row]
                ):
                    best_row, best_ratio = i, ratio
        if best_row < 0:
            return LPStatus.UNBOUNDED
        _pivot(T, best_row, enter)
        basis[best_row] = enter
        path.append(tuple(basis))
    return LPStatus.ITERATION_LIMIT


def simplex_solve(lp: StandardLP, max_iter: int = 10000) -> LPResult:
    """Two-phase dense tableau simplex with Bland's anti-cycling rule."""
    A = lp.A.copy()
    b = lp.b.copy()
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: artificial basis, minimize the sum of artificials
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    path = [tuple(basis)]
    allowed = np.ones(n + m, dtype=bool)
    status = _run_simplex(T, basis, n + m, allowed, path, max_iter)
    if status is LPStatus.ITERATION_LIMIT:
        return LPResult(None, math.nan, status, path)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -T[-1, -1] > 1e-9 * scale:
        return LPResult(None, math.nan, LPStatus.INFEASIBLE, path)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            nz = [j for j in range(n) if abs(T[i, j]) > 1e-9]
            if nz:
                _pivot(T, i, nz[0])
                basis[i] = nz[0]
                keep.append(i)
        else:
            keep.append(i)
    T = np.vstack([T[keep][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[i] for i in keep]
    m2 = len(keep)

    # phase 2: original costs expressed in the current basis
    T[-1, :n] = lp.c
    for i, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[i]
    status = _run_simplex(T, basis, n, np.ones(n, dtype=bool), path, max_iter)
    if status is not LPStatus.OPTIMAL:
        return LPResult(None, math.nan if status is LPStatus.ITERATION_LIMIT else -math.inf,
                        status, path)
    x = np.zeros(n)
    for i in range(m2):
        x[basis[i]] = T[i, -1]
    x[np.abs(x) < _TOL] = 0.0
    return LPResult(x, float(lp.c @ x), LPStatus.OPTIMAL, path)


def brute_force_vertices(lp: StandardLP, tol: float = 1e-9):
    """Best objective over all basic feasible solutions (tiny problems only).

    Returns ``(objective, x)`` or ``(inf, None)`` if no vertex is feasible.
    """
    m, n = lp.A.shape
    rank = np.linalg.matrix_rank(lp.A)
    best, best_x = math.inf, None
    for cols in itertools.combinations(range(n), rank):
        sub = lp.A[:, cols]
        if np.linalg.matrix_rank(sub) < rank:
            continue
        sol, *_ = np.linalg.lstsq(sub, lp.b, rcond=None)
        if np.any(sol < -tol) or np.abs(sub @ sol - lp.b).max() > 1e-8:
            continue
        x = np.zeros(n)
        x[list(cols)] = sol
        val = float(lp.c @ x)
        if val < best:
            best, best_x = val, x
    return best, best_x


# ---------------------------------------------------------------------------
# multinomial barycenter


def _check_frequencies(N, d):
    N = np.asarray(N, dtype=float).ravel()
    if d < 2 or N.size != d:
        raise DomainError(f"need a length-{d} frequency vector with d >= 2")
    if np.any(N < -1e-12) or abs(N.sum() - 1.0) > 1e-9:
        raise DomainError("frequencies must lie on the simplex")
    return N


def barycenter_constraints(d: int):
    """Constraint block [[I, I, 0], [1^T, 0^T, 1]] and rhs 1_d."""
    k = d - 1
    A = np.zeros((d, 2 * k + 1))
    A[:k, :k] = np.eye(k)
    A[:k, k:2 * k] = np.eye(k)
    A[k, :k] = 1.0
    A[k, -1] = 1.0
    return A, np.ones(d)


def build_barycenter_lp(N, d: int, objective: str = "displayed") -> StandardLP:
    """Standard-form LP over x = (t_1..t_{d-1}, slacks for t_k <= 1, slack for sum t <= 1).

    ``objective="displayed"`` uses c = (1 - N_1, ..., 1 - N_{d-1}, 0, ..., 0).
    ``objective="derived"`` uses the linear part (1 - 2 N_k) of the averaged
    l1 cost sum_k N_k + sum_k (1 - 2 N_k) t_k; add :func:`barycenter_constant`
    to recover the averaged cost itself.
    """
    N = _check_frequencies(N, d)
    A, b = barycenter_constraints(d)
    c = np.zeros(2 * (d - 1) + 1)
    if objective == "displayed":
        c[:d - 1] = 1.0 - N[:d - 1]
    elif objective == "derived":
        c[:d - 1] = 1.0 - 2.0 * N[:d - 1]
    else:
        raise ValueError(f"unknown objective {objective!r}")
    return StandardLP(c, A, b)


def barycenter_constant(N) -> float:
    N = np.asarray(N, dtype=float)
    return float(N[:-1].sum())


def build_barycenter_dual(N, d: int, objective: str = "displayed") -> StandardLP:
    """Dual max b^T lam s.t. A^T lam <= c, with lam = u - v and slacks z:

    min (-b^T, b^T)(u; v) s.t. (A^T, -A^T, I)(u; v; z) = c, all >= 0.
    Its optimal value is the negative of the primal optimum.
    """
    primal = build_barycenter_lp(N, d, objective)
    At = primal.A.T
    n_p = At.shape[0]
    A = np.hstack([At, -At, np.eye(n_p)])
    c = np.concatenate([-primal.b, primal.b, np.zeros(n_p)])
    return StandardLP(c, A, primal.c.copy())


def barycenter_from_x(x, d: int) -> np.ndarray:
    t = np.asarray(x, dtype=float)[:d - 1]
    return np.append(t, 1.0 - t.sum())


def direct_barycenter(N, d: int):
    """Minimizer of sum_j N_j W2^2(t, y_j) with W2^2(t, y_j) = 1 - t_j.

    The objective is 1 - <N, t>, so the minimum is at the unit vector of the
    most frequent category (first one on ties), with value 1 - max N.
    """
    N = _check_frequencies(N, d)
    j = int(np.argmax(N))
    t = np.zeros(d)
    t[j] = 1.0
    return t, float(1.0 - N[j])


def barycenter_average_cost(t, N) -> float:
    """(1/n) sum_i W2^2(t, X_i) = sum_j N_j (1 - t_j) for a full probability vector t."""
    t = np.asarray(t, dtype=float)
    N = np.asarray(N, dtype=float)
    return float(np.sum(N * (1.0 - t)))


# ---------------------------------------------------------------------------
# transport plans


@dataclass(frozen=True)
class TransportPlan:
    plan: np.ndarray
    row_marginals: np.ndarray
    col_marginals: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.plan, dtype=float)
        if np.any(p < -1e-12):
            raise DomainError("transport plan has negative entries")
        if np.abs(p.sum(axis=1) - self.row_marginals).max() > 1e-10:
            raise DomainError("row marginals violated")
        if np.abs(p.sum(axis=0) - self.col_marginals).max() > 1e-10:
            raise DomainError("column marginals violated")


def solve_ot_lp(mu, nu, cost):
    """Exact discrete optimal transport by the simplex method.

    The row-sum and column-sum constraints have one linear dependency; the
    last column constraint is dropped before solving.
    """
    mu = np.asarray(mu, dtype=float).ravel()
    nu = np.asarray(nu, dtype=float).ravel()
    cost = np.asarray(cost, dtype=float)
    n, m = mu.size, nu.size
    if cost.shape != (n, m):
        raise ValueError("cost shape does not match marginals")
    if np.any(mu < 0) or np.any(nu < 0):
        raise DomainError("marginals must be nonnegative")
    if abs(mu.sum() - nu.sum()) > 1e-9:
        raise DomainError("marginals have different total mass")
    A = np.zeros((n + m - 1, n * m))
    for i in range(n):
        A[i, i * m:(i + 1) * m] = 1.0
    for j in range(m - 1):
        A[n + j, j::m] = 1.0
    b = np.concatenate([mu, nu[:-1]])
    res = simplex_solve(StandardLP(cost.ravel(), A, b))
    if res.status is not LPStatus.OPTIMAL:
        raise RuntimeError(f"transport LP ended with status {res.status.value}")
    plan = res.x.reshape(n, m)
    return TransportPlan(plan, mu, nu), float(np.sum(plan * cost))


def zero_one_cost(d: int) -> np.ndarray:
    """The 0/1 cost 1(i != j) on d points."""
    return 1.0 - np.eye(d)


# ---------------------------------------------------------------------------
# empirical W2

MAX_EXACT_ASSIGNMENT = 512


def _equalize(x, y, rng=None):
    """Truncate the larger sample to the size of the smaller one (first rows kept)."""
    m = min(len(x), len(y))
    return x[:m], y[:m]


def empirical_w2_1d(x, y) -> float:
    """W2 between equal-weight empirical laws on the line via sorted pairing.

    Unequal sample counts are truncated to the smaller count.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or y.size == 0:
        raise DomainError("empirical W2 needs nonempty samples")
    x, y = _equalize(x, y)
    diff = np.sort(x) - np.sort(y)
    # exact summation keeps the value independent of argument order
    return math.sqrt(math.fsum(diff * diff) / diff.size)


def empirical_w2_2d(x, y, max_size: int = MAX_EXACT_ASSIGNMENT) -> float:
    """W2 between equal-weight empirical laws in R^k via exact optimal assignment.

    Unequal sample counts are truncated to the smaller count; sizes above
    ``max_size`` are refused.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise DomainError("empirical W2 needs nonempty samples")
    if x.shape[1] != y.shape[1]:
        raise ValueError("samples live in different dimensions")
    x, y = _equalize(x, y)
    if len(x) > max_size:
        raise ValueError(f"exact assignment limited to {max_size} points, got {len(x)}")
    cost = ((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=-1)
    rows, cols = linear_sum_assignment(cost)
    return math.sqrt(math.fsum(cost[rows, cols]) / rows.size)


def brute_force_w2(x, y) -> float:
    """Minimum over all M! pairings (tiny M only)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    cost = ((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=-1)
    idx = np.arange(len(x))
    best = min(cost[idx, list(p)].mean() for p in itertools.permutations(idx))
    return math.sqrt(float(best))
