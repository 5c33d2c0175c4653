"""Command-line entry point.

    shoalsbench run --config campaign.toml [--out results/] [--jobs 4]
    shoalsbench sweep --config campaign.toml --ratios 1e-6,1e-3,1,1e2
    shoalsbench problems

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .campaign import (
    ConfigError,
    parse_config,
    run_campaign,
    run_sweep,
    sweep_csv,
    write_campaign,
)
from .problems import builtin_problems


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shoalsbench",
        description="Shot-noise VQE optimizer benchmarks with latency-aware cost accounting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a multi-seed solver campaign")
    run_p.add_argument("--config", required=True, type=Path)
    run_p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: config out_dir or 'results')")
    run_p.add_argument("--jobs", type=int, default=1,
                       help="parallel (solver, seed) workers")

    sweep_p = sub.add_parser("sweep", help="c1/c2 ratio sweep between two solvers")
    sweep_p.add_argument("--config", required=True, type=Path)
    sweep_p.add_argument("--ratios", required=True,
                         help="comma-separated c1/c2 values, e.g. 1e-6,1e-3,1")
    sweep_p.add_argument("--out", type=Path, default=None,
                         help="output CSV (default: <out_dir>/sweep.csv)")
    sweep_p.add_argument("--jobs", type=int, default=1)

    sub.add_parser("problems", help="list bundled problems")
    return parser


def _cmd_run(args) -> int:
    config = parse_config(args.config)
    if args.jobs < 1:
        raise ConfigError("--jobs must be positive")
    out_dir = args.out or Path(config.out_dir or "results")
    grouped = run_campaign(config, jobs=args.jobs)
    summary = write_campaign(config, grouped, out_dir)
    for label, stats in sorted(summary["solvers"].items()):
        print(f"{label}: reached accuracy in {stats['reached']}/{stats['total']} runs, "
              f"median wall-clock {stats['wall_clock_s']['q50']} s")
    print(f"wrote {out_dir}/summary.json")
    return 0


def _parse_ratios(text: str):
    try:
        ratios = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"bad ratio list {text!r}") from None
    if not ratios:
        raise ConfigError("empty ratio grid")
    return ratios


def _cmd_sweep(args) -> int:
    config = parse_config(args.config)
    if args.jobs < 1:
        raise ConfigError("--jobs must be positive")
    ratios = _parse_ratios(args.ratios)
    result = run_sweep(config, ratios, jobs=args.jobs)
    out = args.out or Path(config.out_dir or "results") / "sweep.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(sweep_csv(result), encoding="utf-8")
    crossing = "none in grid" if result.crossing is None else f"{result.crossing:g}"
    print(f"wrote {out} (median=1 crossing: {crossing})")
    return 0


def _cmd_problems() -> int:
    print(f"{'name':<8} {'qubits':>6} {'n':>4} {'t_f':>5} {'t_g':>6}  ground energy")
    for name, problem in builtin_problems().items():
        print(f"{name:<8} {problem.qubit_count:>6} {problem.param_count:>4} "
              f"{problem.circuits_per_f:>5} {problem.circuits_per_g:>6}  "
              f"{problem.ground_energy():.12f}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_problems()
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
