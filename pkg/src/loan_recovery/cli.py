"""Command-line entry point.

Subcommands mirror the library harness: ``run`` executes a single
scenario across its configured measures, ``curve`` restricts to one
measure, ``sweep`` drives the k / b / r_a sweeps, and ``grid`` runs the
Markov transition lattice.  Every command reads an optional TOML config
and writes CSV files into the output directory.

Exit codes: 0 on success, 2 for configuration problems, 3 for I/O
failures.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .config import ConfigError, ScenarioConfig, load_config
from .experiments import (
    emit_results,
    run_loss_rate_sweep,
    run_markov_grid,
    run_payment_prob_sweep,
    run_scenario,
    run_truncation_sweep,
)

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_IO = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML scenario file (defaults apply otherwise)")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--out", default="results", help="output directory (default: results)")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    parser.add_argument("--bins", type=int, help="override the quantile-grid resolution")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loan-recovery",
        description="Synthetic loan portfolios, delinquency measures, and "
        "recovery-threshold optimisation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario over its configured measures")
    _add_common(run)

    curve = sub.add_parser("curve", help="run one scenario for a single measure")
    curve.add_argument("--measure", required=True, choices=("g1", "g2", "g3"))
    _add_common(curve)

    sweep = sub.add_parser("sweep", help="sweep one parameter, reporting G1 optima")
    sweep.add_argument("--param", required=True, choices=("k", "b", "r_a"))
    sweep.add_argument(
        "--values", required=True, help="comma-separated parameter values"
    )
    _add_common(sweep)

    grid = sub.add_parser("grid", help="run the Markov (p_pp, p_dd) lattice")
    grid.add_argument("--p-pp", help="comma-separated p_pp values (default lattice otherwise)")
    grid.add_argument("--p-dd", help="comma-separated p_dd values (default lattice otherwise)")
    _add_common(grid)

    return parser


def _parse_floats(text: str, flag: str) -> list[float]:
    pieces = [piece.strip() for piece in text.split(",") if piece.strip()]
    if not pieces:
        raise ConfigError(f"{flag} needs at least one value")
    try:
        return [float(piece) for piece in pieces]
    except ValueError as exc:
        raise ConfigError(f"bad value in {flag}: {exc}") from exc


def _build_config(args: argparse.Namespace) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    overrides: dict[str, object] = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.bins is not None:
        overrides["n_bins"] = args.bins
    return config.replace(**overrides) if overrides else config


def _dispatch(args: argparse.Namespace) -> int:
    config = _build_config(args)
    workers = args.workers
    if workers < 1:
        raise ConfigError(f"--workers must be at least 1, got {workers}")

    if args.command == "run":
        results = run_scenario(config, workers=workers)
    elif args.command == "curve":
        results = run_scenario(
            config.replace(measures=(args.measure,)), workers=workers
        )
    elif args.command == "sweep":
        values = _parse_floats(args.values, "--values")
        if args.param == "k":
            ks = []
            for value in values:
                if value != int(value):
                    raise ConfigError(f"truncation depths must be integers, got {value}")
                ks.append(int(value))
            results = run_truncation_sweep(config, ks, workers=workers)
        elif args.param == "b":
            results = run_payment_prob_sweep(config, values, workers=workers)
        else:
            results = run_loss_rate_sweep(config, values, workers=workers)
    elif args.command == "grid":
        pp = _parse_floats(args.p_pp, "--p-pp") if args.p_pp else None
        dd = _parse_floats(args.p_dd, "--p-dd") if args.p_dd else None
        results = run_markov_grid(config, pp, dd, workers=workers)
        for point, reason in results.skipped:
            print(f"skipped cell {point}: {reason}", file=sys.stderr)
    else:  # pragma: no cover - argparse enforces the choices
        raise ConfigError(f"unknown command {args.command!r}")

    written = emit_results(results, args.out)
    for path in written:
        print(path)
    return _EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
