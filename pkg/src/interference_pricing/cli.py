"""Command-line entry point.

Every subcommand reads an optional YAML configuration, runs one computation
and writes a CSV table (to ``--out`` or standard output).  Exit status is 0 on
success, 2 for configuration or input errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyTable, GainFloorWarning, PricingError, ValidationError
from .experiments import RUNS, emit_csv, emit_plotdata, parse_config, to_csv, validate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

HELP = {
    "we": "user equilibrium flows at the configured prices",
    "me": "monopoly prices (differentiated and uniform)",
    "de": "duopoly (or oligopoly) equilibrium prices",
    "metrics": "PoCS and PoCP for the configured market or sweep",
    "fig4": "monopoly vs duopoly along an a2 sweep",
    "fig5": "PoCS and PoCP for symmetric gains at several s",
    "regions": "region labels and equilibrium counts over the (a2, b1) plane",
    "fd_curve": "sampled total-demand correspondence for a two-AP market",
    "verify": "randomized solver cross-checks and the efficiency bound grid",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interference-pricing", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in HELP.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", type=Path, help="YAML configuration file")
        p.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
        p.add_argument("--plotdata", type=Path, help="also write plot blocks and a .meta.json sidecar")
        p.add_argument("--step", type=float, help="override the step of every swept variable")
        p.add_argument("--allow-strong", action="store_true", help="permit strong-interference markets")
        p.add_argument("--seed", type=int, help="random seed (verify)")
        if name == "verify":
            p.add_argument("--instances", type=int, default=1000, help="random LCP instances to check")
    return parser


def load(args) -> object:
    run, defaults = RUNS[args.command]
    text = args.config.read_text() if args.config else ""
    overrides = {}
    if args.allow_strong:
        overrides["allow_strong"] = True
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = parse_config(text, overrides, **defaults)
    if args.step is not None:
        if args.step <= 0:
            raise ValidationError("step", "must be positive")
        cfg = cfg.with_step(args.step)
    return validate(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        # zero gains in configs are expected; the floor is documented behaviour
        warnings.filterwarnings("ignore", category=GainFloorWarning)
        return _run(args)


def _run(args) -> int:
    run, _ = RUNS[args.command]
    try:
        cfg = load(args)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        table = run(cfg, args.instances) if args.command == "verify" else run(cfg)
        out = args.out or (Path(cfg.out) if cfg.out else None)
        if out is not None:
            emit_csv(table, out)
        else:
            if not table.rows:
                raise EmptyTable(f"table {table.name!r} has no rows")
            sys.stdout.write(to_csv(table))
        if args.plotdata is not None:
            emit_plotdata(table, args.plotdata)
    except np.linalg.LinAlgError as exc:
        print(f"error: LinAlgError: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PricingError, ArithmeticError, AssertionError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
