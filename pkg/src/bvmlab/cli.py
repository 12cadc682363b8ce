"""Command line entry point: ``bvmlab <subcommand>``."""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .asymptotics import qq_points
from .discrete_ot import (
    LPStatus,
    barycenter_average_cost,
    barycenter_constant,
    barycenter_from_x,
    build_barycenter_dual,
    build_barycenter_lp,
    direct_barycenter,
    simplex_solve,
)
from .experiments import ExperimentConfig, default_config, format_summary, run_experiment
from .losses import LOSSES, get_loss
from .plotting import render_svg
from .wass_calculus import derivative_check_grid, pareto_dual_model

EXIT_CHECK_FAILED = 2


def _floats(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_loss_table(args) -> int:
    loss = get_loss(args.loss)
    ts = np.linspace(args.t_min, args.t_max, args.points)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t", "theta", "value", "gradient"])
    for theta in _floats(args.theta):
        for t in ts:
            value = float(loss(t, theta))
            try:
                grad = float(loss.grad_t(t, theta))
            except (NotImplementedError, ValueError):
                grad = float("nan")
            w.writerow([repr(float(t)), repr(theta), repr(value), repr(grad)])
    return 0


def cmd_check_derivatives(args) -> int:
    lo, hi, k = args.grid
    grid = np.linspace(lo, hi, int(k))
    rows = derivative_check_grid(pareto_dual_model(), grid, grid)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["t0", "theta", "grad_dual", "grad_fd", "hess_dual", "hess_fd", "status"])
    for r in rows:
        w.writerow([*(repr(v) for v in r[:6]), "pass" if r[6] else "fail"])
    failed = sum(not r[6] for r in rows)
    print(f"# {len(rows) - failed}/{len(rows)} grid points pass", file=sys.stderr)
    return EXIT_CHECK_FAILED if (failed and args.check) else 0


def _lp_json(lp):
    return {"c": lp.c.tolist(), "A": lp.A.tolist(), "b": lp.b.tolist()}


def barycenter_report(freq) -> dict:
    N = np.asarray(freq, dtype=float)
    d = N.size
    out = {"frequencies": N.tolist(), "d": d}
    for objective in ("displayed", "derived"):
        primal = build_barycenter_lp(N, d, objective)
        dual = build_barycenter_dual(N, d, objective)
        p = simplex_solve(primal)
        q = simplex_solve(dual)
        entry = {"primal": _lp_json(primal), "dual": _lp_json(dual),
                 "primal_status": p.status.value, "dual_status": q.status.value}
        if p.status is LPStatus.OPTIMAL and q.status is LPStatus.OPTIMAL:
            t = barycenter_from_x(p.x, d)
            entry.update({
                "primal_optimum": p.objective,
                "dual_optimum": q.objective,
                "duality_gap": p.objective + q.objective,
                "barycenter": t.tolist(),
                "average_w2sq_at_barycenter": barycenter_average_cost(t, N),
            })
            if objective == "derived":
                entry["l1_objective_value"] = p.objective + barycenter_constant(N)
        out[objective] = entry
    t_direct, v_direct = direct_barycenter(N, d)
    out["direct"] = {"barycenter": t_direct.tolist(), "average_w2sq": v_direct}
    lp_costs = [out[o].get("average_w2sq_at_barycenter") for o in ("displayed", "derived")]
    out["discrepancy"] = any(c is None or abs(c - v_direct) > 1e-9 for c in lp_costs)
    return out


def cmd_barycenter_lp(args) -> int:
    print(json.dumps(barycenter_report(_floats(args.freq)), indent=2))
    return 0


def cmd_bvm_sim(args) -> int:
    cfg = ExperimentConfig.load(args.config) if args.config else default_config(args.experiment)
    if args.config and cfg.experiment != args.experiment:
        print(f"config is for {cfg.experiment}, not {args.experiment}", file=sys.stderr)
        return 1
    if args.out:
        cfg.output_dir = args.out
    if args.replications:
        cfg.replications = args.replications
    if args.full_scale:
        if cfg.experiment == "exp-gamma":
            cfg.n_grid = sorted(set(cfg.n_grid) | {1_000_000})
        else:
            cfg.replications = 2000
    report = run_experiment(cfg)
    out = report.write()
    print(format_summary(report))
    print(f"report written to {out}")
    if args.check and not report.passed:
        return EXIT_CHECK_FAILED
    return 0


def cmd_qq(args) -> int:
    with open(args.input, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if args.loss:
        rows = [r for r in rows if r["loss"] == args.loss]
    if args.n:
        rows = [r for r in rows if int(r["n"]) == args.n]
    vals = [float(r[args.column]) for r in rows]
    if not vals:
        print("no rows selected", file=sys.stderr)
        return 1
    render_svg(qq_points(vals), "qq", args.out, title=f"{args.column} vs N(0,1)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bvmlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("loss-table", help="CSV of loss values and gradients on a grid")
    s.add_argument("--loss", default="w2_pareto", choices=sorted(LOSSES))
    s.add_argument("--theta", default="4", help="comma separated theta values")
    s.add_argument("--t-min", type=float, default=2.5)
    s.add_argument("--t-max", type=float, default=6.0)
    s.add_argument("--points", type=int, default=8)
    s.set_defaults(func=cmd_loss_table)

    s = sub.add_parser("check-derivatives", help="dual-potential derivatives vs finite differences")
    s.add_argument("--grid", type=float, nargs=3, default=(2.5, 6.0, 5), metavar=("LO", "HI", "K"))
    s.add_argument("--check", action="store_true", help="exit with status 2 on any failure")
    s.set_defaults(func=cmd_check_derivatives)

    s = sub.add_parser("barycenter-lp", help="multinomial barycenter LP, dual and direct minimizer")
    s.add_argument("--freq", required=True, help="comma separated category frequencies")
    s.set_defaults(func=cmd_barycenter_lp)

    s = sub.add_parser("bvm-sim", help="run a simulation study and write its report")
    s.add_argument("--experiment", choices=("exp-gamma", "mult-dirichlet"), default="exp-gamma")
    s.add_argument("--config", help="JSON config file (defaults used otherwise)")
    s.add_argument("--out", help="output directory (overrides the config)")
    s.add_argument("--replications", type=int, help="override the number of replications")
    s.add_argument("--full-scale", action="store_true",
                   help="add n = 10^6 (exp-gamma) or use 2000 replications (mult-dirichlet)")
    s.add_argument("--check", action="store_true", help="exit with status 2 if any check fails")
    s.set_defaults(func=cmd_bvm_sim)

    s = sub.add_parser("qq", help="QQ plot SVG from a replications CSV")
    s.add_argument("--input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--column", default="scaled_1")
    s.add_argument("--loss")
    s.add_argument("--n", type=int)
    s.set_defaults(func=cmd_qq)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
