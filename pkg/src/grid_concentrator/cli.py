"""Command-line entry point.

Usage::

    grid-concentrator <experiment> --config cfg.json [--seed N] [--samples N]
                      [--out path] [--format csv|json] [--assert-bounds]

``<experiment>`` is one of fig1, thm2_tail, thm2_expectation, lcpf_bounds,
manifold, bruteforce and overrides the config file's ``experiment`` field.
Exit codes: 0 success, 1 config error, 2 dominance-check failure when
``--assert-bounds`` is passed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiment_harness import (
    EXPERIMENT_NAMES,
    ConfigError,
    ExperimentConfig,
    emit,
    run_experiment,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grid-concentrator",
        description="Concentration-bound validation experiments for random "
                    "power-network admittance matrices.")
    parser.add_argument("experiment", choices=EXPERIMENT_NAMES)
    parser.add_argument("--config", help="JSON experiment config file")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--samples", type=int, help="sample count override")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), dest="fmt",
                        help="output format override")
    parser.add_argument("--assert-bounds", action="store_true",
                        help="exit 2 if any dominance check fails")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help; treat anything else as a config error.
        return 0 if exc.code == 0 else 1

    try:
        cfg_dict = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg_dict = json.load(fh)
            if not isinstance(cfg_dict, dict):
                raise ConfigError("config file must contain a JSON object")
        cfg_dict["experiment"] = args.experiment
        if args.seed is not None:
            cfg_dict["seed"] = args.seed
        if args.samples is not None:
            cfg_dict["samples"] = args.samples
        if args.out is not None:
            cfg_dict["out"] = args.out
        if args.fmt is not None:
            cfg_dict["format"] = args.fmt
        cfg = ExperimentConfig.from_dict(cfg_dict)
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        text = emit(result.records, cfg.format, cfg.out, result.fieldnames)
    except OSError as exc:
        print(f"config error: cannot write output: {exc}", file=sys.stderr)
        return 1
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        print(f"{cfg.experiment}: wrote {len(result.records)} records to {cfg.out}")
    if not result.bounds_ok:
        print(f"{cfg.experiment}: dominance check FAILED", file=sys.stderr)
        if args.assert_bounds:
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
