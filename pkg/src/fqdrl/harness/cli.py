"""Command line entry point.

    fqdrl run <config.json> [--out DIR] [--seed N] [--agents N]
    fqdrl compare <global.csv> <global.csv> [...] [--threshold T] [--save PATH]
    fqdrl validate <config.json>

Exit codes: 0 success, 1 configuration error, 2 runtime or divergence error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from ..errors import ConfigurationError, TrainingDivergenceError, UsageError
from .config import load_config
from .metrics import compare_runs, format_table
from .runner import parameter_counts, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fqdrl", description="Federated quantum DQN experiments")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train agents as described by a config file")
    run.add_argument("config")
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.add_argument("--seed", type=int, help="master seed (overrides seed)")
    run.add_argument("--agents", type=int, help="number of agents (overrides n_agents)")

    cmp_ = sub.add_parser("compare", help="compare global.csv files from several runs")
    cmp_.add_argument("csv", nargs="+")
    cmp_.add_argument("--threshold", type=float, default=None, help="moving-average reward threshold")
    cmp_.add_argument("--window", type=int, default=20)
    cmp_.add_argument("--save", help="write the comparison table as CSV")

    val = sub.add_parser("validate", help="check a config file and print the resolved config")
    val.add_argument("config")
    return parser


def _apply_overrides(cfg, args):
    overrides = {}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.agents is not None:
        overrides["n_agents"] = args.agents
    if not overrides:
        return cfg
    cfg = dataclasses.replace(cfg, **overrides)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            print(json.dumps({"config": cfg.to_dict(), "parameter_counts": parameter_counts(cfg)}, indent=2))
        elif args.command == "run":
            cfg = _apply_overrides(load_config(args.config), args)
            metrics = run_experiment(cfg)
            out = cfg.resolved_output_dir()
            g = metrics.global_moving_average
            print(f"{cfg.name}: {metrics.episodes} episodes, {len(metrics.rounds)} federation rounds, "
                  f"final moving-average reward {g[-1]:.3f}; outputs in {out}")
        else:
            rows = compare_runs(args.csv, args.threshold, args.window, args.save)
            print(format_table(rows))
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrainingDivergenceError, UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
