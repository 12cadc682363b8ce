"""Simulation studies: Bayes estimators under intrinsic losses as n grows.

Two experiments are provided:

* ``exp-gamma``: Exp(theta) data, Gamma(a, b) prior, Hellinger / W2 / KL losses.
* ``mult-dirichlet``: Mult(1, p) data on d categories, Dirichlet prior,
  l1 loss on the (d-1)-coordinate chart.

Each replication owns a random stream derived from (experiment, loss, n, rep)
so results do not depend on execution order or worker count.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .asymptotics import (
    ReplicationSet,
    gaussian_limit_distance,
    ks_statistic,
    qq_points,
    standardize,
)
from .bayes_opt import RiskProblem, minimize_risk
from .families import exponential_family, multinomial_family
from .losses import get_loss
from .plotting import render_svg
from .posterior import update_exp_gamma_stats, update_mult_counts
from .special import RngStream, stream_hash

EXPERIMENTS = ("exp-gamma", "mult-dirichlet")


@dataclass
class ExperimentConfig:
    """Settings of one simulation study; round-trips through JSON.

    ``draws`` is the posterior sample size S; ``draws_by_n`` overrides it for
    particular sample sizes (JSON keys are strings).
    """

    experiment: str = "exp-gamma"
    theta0: list = field(default_factory=lambda: [2.0])
    prior: list = field(default_factory=lambda: [2.0, 2.0])
    losses: list = field(default_factory=lambda: ["hellinger", "w2", "kl"])
    n_grid: list = field(default_factory=lambda: [10, 100, 1000, 10000])
    replications: int = 500
    draws: int = 2000
    draws_by_n: dict = field(default_factory=dict)
    seed: int = 1
    output_dir: str = "results"
    metric_repetitions: int = 20
    workers: int = 1
    ks_threshold: float = 0.09
    median_tolerance: float = 1e-3

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.replications < 2:
            raise ValueError("need at least two replications")
        if any(int(n) < 1 for n in self.n_grid):
            raise ValueError("sample sizes must be positive")
        if self.draws < 100 or any(int(v) < 100 for v in self.draws_by_n.values()):
            raise ValueError("need at least 100 posterior draws")
        if any(p <= 0 for p in self.prior):
            raise ValueError("prior parameters must be positive")
        for name in self.losses:
            get_loss(name)
        if self.experiment == "exp-gamma":
            if len(self.theta0) != 1 or not self.theta0[0] > 0:
                raise ValueError("exp-gamma needs a single positive rate")
            if len(self.prior) != 2:
                raise ValueError("exp-gamma prior is (shape, rate)")
        else:
            d = len(self.prior)
            if len(self.theta0) != d - 1:
                raise ValueError("theta0 must have d - 1 free coordinates")
            if min(self.theta0) <= 0 or sum(self.theta0) >= 1:
                raise ValueError("theta0 must be interior to the simplex")
            if d > 3:
                raise ValueError("the W2 limit diagnostic supports d <= 3")

    def draws_for(self, n: int) -> int:
        return int(self.draws_by_n.get(str(n), self.draws_by_n.get(n, self.draws)))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.draws_by_n = {str(k): int(v) for k, v in cfg.draws_by_n.items()}
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())


def default_config(experiment: str) -> ExperimentConfig:
    if experiment == "exp-gamma":
        return ExperimentConfig()
    if experiment == "mult-dirichlet":
        return ExperimentConfig(
            experiment="mult-dirichlet", theta0=[1 / 3, 1 / 3], prior=[1.0, 1.0, 1.0],
            losses=["l1_reparam"], n_grid=[16, 256, 4096], replications=500,
            draws=50000, draws_by_n={"16": 400000},
        )
    raise ValueError(f"unknown experiment {experiment!r}")


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    summary: list
    checks: dict
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def csv_text(self) -> str:
        d = len(self.config.theta0)
        header = (["rep", "n", "loss"] + [f"theta_hat_{i + 1}" for i in range(d)]
                  + [f"scaled_{i + 1}" for i in range(d)] + ["status"])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in self.rows:
            w.writerow([r["rep"], r["n"], r["loss"]] + [repr(float(v)) for v in r["theta_hat"]]
                       + [repr(float(v)) for v in r["scaled"]] + [r["status"]])
        return buf.getvalue()

    def summary_json(self) -> str:
        doc = {
            "experiment": self.config.experiment,
            "seed": self.config.seed,
            "scaled_convention": "scaled = I(theta0)^(1/2) sqrt(n) (theta_hat - theta0), "
                                 "symmetric square root; raw values are sqrt(n)(theta_hat - theta0)",
            "seed_provenance": "stream id = stream_hash(experiment, loss, n, rep)",
            "summary": self.summary,
            "checks": self.checks,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir=None) -> Path:
        out = Path(out_dir or self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(self.config.to_json() + "\n")
        (out / "replications.csv").write_text(self.csv_text())
        (out / "summary.json").write_text(self.summary_json())
        if self.config.experiment == "exp-gamma":
            d_rows = {}
            for r in self.rows:
                d_rows.setdefault((r["loss"], r["n"]), []).append(r["scaled"][0])
            for (loss, n), vals in sorted(d_rows.items()):
                render_svg(qq_points(vals), "qq", out / f"qq_{loss}_{n}.svg",
                           title=f"{loss}, n={n}: standardized estimator vs N(0,1)")
        else:
            pts = [(s["n"], s["w2_to_limit"]) for s in self.summary]
            render_svg(pts, "trend", out / "w2_trend.svg",
                       title="median W2 distance to the Gaussian limit")
        return out


def _seed() -> int:
    return int(os.environ["BVMLAB_SEED"]) if os.environ.get("BVMLAB_SEED") else None


def replication_stream(cfg: ExperimentConfig, loss: str, n: int, rep: int) -> RngStream:
    return RngStream(cfg.seed, stream_hash(cfg.experiment, loss, int(n), int(rep)))


# ---------------------------------------------------------------------------
# exponential-gamma


def _exp_gamma_one(args):
    cfg, loss_name, n, rep = args
    stream = replication_stream(cfg, loss_name, n, rep)
    gen = stream.generator()
    theta0 = cfg.theta0[0]
    x = gen.exponential(1.0 / theta0, size=n)
    post = update_exp_gamma_stats(cfg.prior[0], cfg.prior[1], n, float(x.sum()))
    draws = post.sample(cfg.draws_for(n), gen)
    loss = get_loss(loss_name)
    res = minimize_risk(RiskProblem(draws, loss))
    extra = {"posterior_mean": post.mean(), "draw_mean": float(draws.mean())}
    return [float(res.theta_hat)], res.status, extra


def run_exp_gamma(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment != "exp-gamma":
        raise ValueError("config is not an exp-gamma experiment")
    fisher = exponential_family().fisher(cfg.theta0[0])
    return _run(cfg, _exp_gamma_one, fisher)


# ---------------------------------------------------------------------------
# multinomial-Dirichlet


def _mult_one(args):
    cfg, loss_name, n, rep = args
    stream = replication_stream(cfg, loss_name, n, rep)
    gen = stream.generator()
    p0 = np.append(cfg.theta0, 1.0 - sum(cfg.theta0))
    counts = gen.multinomial(n, p0)
    post = update_mult_counts(cfg.prior, counts)
    draws = post.sample(cfg.draws_for(n), gen)
    res = minimize_risk(RiskProblem(draws, get_loss(loss_name), domain="simplex"))
    medians = post.marginal_medians()
    gap = float(np.max(np.abs(np.asarray(res.theta_hat) - medians)))
    return [float(v) for v in res.theta_hat], res.status, {"median_gap": gap}


def run_mult_dirichlet(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment != "mult-dirichlet":
        raise ValueError("config is not a mult-dirichlet experiment")
    fisher = multinomial_family(len(cfg.prior)).fisher(cfg.theta0)
    return _run(cfg, _mult_one, fisher)


# ---------------------------------------------------------------------------
# shared driver


def _run(cfg: ExperimentConfig, one, fisher) -> ExperimentReport:
    env_seed = _seed()
    if env_seed is not None:
        cfg.seed = env_seed
    start = time.perf_counter()
    tasks = [(cfg, loss, int(n), rep) for loss in cfg.losses for n in cfg.n_grid
             for rep in range(cfg.replications)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(one, tasks, chunksize=8))
    else:
        results = [one(t) for t in tasks]

    theta0 = np.asarray(cfg.theta0, dtype=float)
    rows = []
    groups = {}
    for (_, loss, n, rep), (theta_hat, status, extra) in zip(tasks, results):
        groups.setdefault((loss, n), []).append((rep, theta_hat, status, extra))
    summary = []
    for (loss, n), items in groups.items():
        est = np.array([it[1] for it in items])
        reps = ReplicationSet(n, theta0, est, loss, cfg.seed)
        scaled = standardize(reps, fisher)
        for (rep, theta_hat, status, _), sc in zip(items, scaled):
            rows.append({"rep": rep, "n": n, "loss": loss, "theta_hat": theta_hat,
                         "scaled": sc.tolist(), "status": status})
        entry = {
            "loss": loss, "n": n,
            "median_abs_error": float(np.median(np.abs(est - theta0).max(axis=1))),
            "ks": [ks_statistic(scaled[:, k]) for k in range(scaled.shape[1])],
            "converged": sum(it[2] == "converged" for it in items),
        }
        metric = [gaussian_limit_distance(reps, fisher, RngStream(cfg.seed, stream_hash(
            cfg.experiment, "reference", k))) for k in range(cfg.metric_repetitions)]
        entry["w2_to_limit"] = float(np.median(metric))
        if cfg.experiment == "mult-dirichlet":
            entry["max_median_gap"] = max(it[3]["median_gap"] for it in items)
        else:
            entry["max_draw_mean_gap"] = max(
                abs(it[1][0] - it[3]["draw_mean"]) for it in items)
        summary.append(entry)
    report = ExperimentReport(cfg, rows, summary, _checks(cfg, summary),
                              time.perf_counter() - start)
    return report


def _checks(cfg: ExperimentConfig, summary) -> dict:
    checks = {}
    by_loss = {}
    for s in summary:
        by_loss.setdefault(s["loss"], []).append(s)
    for loss, entries in by_loss.items():
        entries = sorted(entries, key=lambda s: s["n"])
        if cfg.experiment == "exp-gamma":
            if loss in ("hellinger", "w2", "kl"):
                checks[f"{loss}: KS at n={entries[-1]['n']} <= {cfg.ks_threshold}"] = (
                    max(entries[-1]["ks"]) <= cfg.ks_threshold)
            if len(entries) > 1:
                checks[f"{loss}: median |error| shrinks from n={entries[0]['n']} "
                       f"to n={entries[-1]['n']}"] = (
                    entries[-1]["median_abs_error"] < entries[0]["median_abs_error"])
        else:
            checks[f"{loss}: estimates match marginal medians within "
                   f"{cfg.median_tolerance:g}"] = all(
                s["max_median_gap"] <= cfg.median_tolerance for s in entries)
            w = [s["w2_to_limit"] for s in entries]
            checks[f"{loss}: W2 to Gaussian limit strictly decreasing in n"] = all(
                a > b for a, b in zip(w, w[1:]))
    return checks


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.experiment == "exp-gamma":
        return run_exp_gamma(cfg)
    return run_mult_dirichlet(cfg)


def format_summary(report: ExperimentReport) -> str:
    lines = []
    for s in report.summary:
        extra = (f" max_median_gap={s['max_median_gap']:.2e}" if "max_median_gap" in s else "")
        ks = ",".join(f"{v:.4f}" for v in s["ks"])
        lines.append(f"{s['loss']:>10s} n={s['n']:<6d} median|err|={s['median_abs_error']:.5f} "
                     f"KS={ks} W2lim={s['w2_to_limit']:.4f}{extra}")
    for name, ok in report.checks.items():
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}")
    lines.append(f"wall clock {report.wall_clock:.1f}s")
    return "\n".join(lines)
