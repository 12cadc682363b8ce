"""Run a simulation study from a JSON config and print its summary.

    python3 scripts/run_study.py scripts/exp_gamma.json
    python3 scripts/run_study.py scripts/mult_dirichlet.json --out /tmp/mult
"""

import argparse
import sys

from bvmlab.experiments import ExperimentConfig, format_summary, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", help="output directory (overrides the config)")
    args = ap.parse_args(argv)
    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.output_dir = args.out
    report = run_experiment(cfg)
    path = report.write()
    print(format_summary(report))
    print(f"report written to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
