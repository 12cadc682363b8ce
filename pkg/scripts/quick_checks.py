"""Fast numerical checks: derivative grid, barycenter LP, TV local limit."""

import json
import math

import numpy as np

from bvmlab.cli import barycenter_report
from bvmlab.losses import SQRT_2_OVER_PI, tv_gauss_location
from bvmlab.wass_calculus import derivative_check_grid, pareto_dual_model


def main():
    grid = np.linspace(2.5, 6.0, 5)
    rows = derivative_check_grid(pareto_dual_model(), grid, grid)
    print(f"derivative grid: {sum(r[6] for r in rows)}/{len(rows)} points pass")

    print("barycenter LP for frequencies (0.6, 0.3, 0.1):")
    print(json.dumps(barycenter_report([0.6, 0.3, 0.1]), indent=2, default=float))

    eps, t, h = 1e-4, np.array([1.0, 0.5]), np.array([-0.2, 0.3])
    lhs = float(tv_gauss_location(eps * t, eps * h)) / eps
    rhs = SQRT_2_OVER_PI * float(np.linalg.norm(t - h))
    print(f"TV local limit: {lhs:.8f} vs {rhs:.8f} (diff {abs(lhs - rhs):.1e})")
    return 0 if all(r[6] for r in rows) and math.isclose(lhs, rhs, abs_tol=1e-3) else 2


if __name__ == "__main__":
    raise SystemExit(main())
