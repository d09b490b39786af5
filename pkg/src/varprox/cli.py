"""Command-line experiment runner.

Usage: ``varprox <experiment> [--config FILE] [--seed N] [--out DIR]
[--full-scale]``. Exit codes: 0 on success, 2 for configuration errors,
3 when a required solve fails to converge.
"""

from __future__ import annotations

import argparse
import sys
import time

from .harness.experiments import run
from .harness.reports import EXPERIMENT_KINDS, ConfigError, ExperimentConfig, write_timing

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varprox",
        description="Run a variable-projection experiment and emit report.json plus plot CSVs.",
    )
    parser.add_argument("experiment", choices=EXPERIMENT_KINDS)
    parser.add_argument("--config", help="JSON config file (flat key/value overrides)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory (default: results)")
    parser.add_argument("--full-scale", action="store_true", default=None,
                        help="use the full-size study where a desk-scale default exists")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = ExperimentConfig.from_file(args.config, kind=args.experiment,
                                             seed=args.seed, out_dir=args.out,
                                             full_scale=args.full_scale)
        else:
            cfg = ExperimentConfig(
                kind=args.experiment,
                seed=args.seed if args.seed is not None else 0,
                out_dir=args.out if args.out is not None else "results",
                full_scale=bool(args.full_scale),
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    start = time.perf_counter()
    report, ok = run(cfg)
    write_timing(time.perf_counter() - start, cfg.out_dir)
    print(f"wrote {cfg.out_dir}/report.json ({cfg.kind}, seed {cfg.seed})")
    if not ok:
        print("solver did not reach the requested tolerance; see report.json", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
