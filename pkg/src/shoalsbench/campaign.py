"""Multi-seed solver campaigns: orchestration, trajectory CSVs, summary JSON.

A campaign is fully specified by a TOML config (no environment lookups), so
reruns with the same master seed produce byte-identical outputs:

    problem = "toy-2q"           # builtin name or path to a descriptor
    master_seed = 2024
    seeds = 10                   # count, or an explicit list [0, 3, 7]
    accuracy = 0.0016
    out_dir = "results"

    [budget]
    max_seconds = 1.0e4          # simulated seconds; and/or max_iterations

    [device]
    c1 = 1.0e-5
    c2 = 0.1
    c3 = 4.0

    [[solvers]]
    kind = "shoals"

    [[solvers]]
    kind = "adam"
    batch = 100

Initial points are drawn once per seed, from the master seed, and shared by
every solver.  Each (solver, seed) run owns an independent generator keyed by
(master_seed, seed, crc32(label)), so adding or reordering solvers never
perturbs the others' shot streams.
"""

from __future__ import annotations

import json
import math
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .costmodel import SweepResult, quantile, sweep_from_trajectories
from .estimators import CostSnapshot, DeviceModel, SUPERCONDUCTING
from .optimizers import (
    Budget,
    DEFAULT_ACCURACY,
    ShoalsConfig,
    Trajectory,
    adam_run,
    icans_run,
    sgd_run,
    shoals_run,
)
from .problems import resolve_problem
from .sim import Problem

TRAJECTORY_COLUMNS = (
    "iter,exact_f,gap_to_fstar,f0_est,fs_est,grad_norm_est,alpha,accepted,"
    "n_f,n_g_total,shots_cum,switches_cum,comms_cum,wall_clock_s"
)

SWEEP_COLUMNS = "ratio,q25,q50,q75,crossing"

INFINITY_MARKER = "inf"


class ConfigError(ValueError):
    """Invalid campaign configuration."""


@dataclass(frozen=True)
class SolverSpec:
    """One solver entry from the config: kind plus its settings."""

    kind: str
    label: str
    options: Tuple[Tuple[str, object], ...] = ()

    def run(self, problem: Problem, device: DeviceModel, rng: np.random.Generator,
            budget: Budget, theta0: np.ndarray) -> Trajectory:
        opts = dict(self.options)
        if self.kind == "shoals":
            config = ShoalsConfig(**opts)
            return shoals_run(problem, config, device, rng, budget, theta0,
                              solver_label=self.label)
        if self.kind == "sgd":
            return sgd_run(problem, opts["alpha"], opts.get("batch", 100),
                           device, rng, budget, theta0, solver_label=self.label)
        if self.kind == "adam":
            return adam_run(problem, opts.get("alpha"), opts.get("batch", 100),
                            device, rng, budget, theta0,
                            beta1=opts.get("beta1", 0.9),
                            beta2=opts.get("beta2", 0.999),
                            offset=opts.get("offset", 1e-8),
                            solver_label=self.label)
        if self.kind == "icans":
            return icans_run(problem, device, rng, budget, theta0,
                             s_min=opts.get("s_min", 30),
                             alpha=opts.get("alpha"),
                             solver_label=self.label)
        raise ConfigError(f"unknown solver kind {self.kind!r}")


_SOLVER_OPTION_KEYS = {
    "shoals": {"gamma", "c", "alpha_max", "alpha0", "p", "eps_f", "eps_g",
               "warmup_samples", "sample_cap"},
    "sgd": {"alpha", "batch"},
    "adam": {"alpha", "batch", "beta1", "beta2", "offset"},
    "icans": {"s_min", "alpha"},
}


@dataclass(frozen=True)
class CampaignConfig:
    problem_ref: str
    solvers: Tuple[SolverSpec, ...]
    seeds: Tuple[int, ...]
    master_seed: int
    budget: Budget
    device: DeviceModel
    accuracy: float
    out_dir: Optional[str] = None

    def load_problem(self) -> Problem:
        return resolve_problem(self.problem_ref)


def _default_label(kind: str, options: dict) -> str:
    if kind in ("adam", "sgd"):
        return f"{kind}-{options.get('batch', 100)}"
    return kind


def parse_config(path: Path) -> CampaignConfig:
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    if "problem" not in data:
        raise ConfigError("config missing 'problem'")
    solver_entries = data.get("solvers")
    if not solver_entries:
        raise ConfigError("config needs at least one [[solvers]] entry")

    specs = []
    labels = set()
    for entry in solver_entries:
        entry = dict(entry)
        kind = entry.pop("kind", None)
        if kind not in _SOLVER_OPTION_KEYS:
            raise ConfigError(f"unknown solver kind {kind!r}")
        label = str(entry.pop("label", _default_label(kind, entry)))
        unknown = set(entry) - _SOLVER_OPTION_KEYS[kind]
        if unknown:
            raise ConfigError(f"solver {label!r}: unknown options {sorted(unknown)}")
        if kind == "sgd" and "alpha" not in entry:
            raise ConfigError("sgd solver requires an explicit alpha")
        if label in labels:
            raise ConfigError(f"duplicate solver label {label!r}")
        labels.add(label)
        specs.append(SolverSpec(kind=kind, label=label,
                                options=tuple(sorted(entry.items()))))

    seeds_field = data.get("seeds", 10)
    if isinstance(seeds_field, int):
        if seeds_field < 1:
            raise ConfigError("seed count must be positive")
        seeds = tuple(range(seeds_field))
    elif isinstance(seeds_field, list) and seeds_field:
        seeds = tuple(int(s) for s in seeds_field)
        if len(set(seeds)) != len(seeds):
            raise ConfigError("duplicate seeds")
    else:
        raise ConfigError("'seeds' must be a positive count or a non-empty list")

    accuracy = float(data.get("accuracy", DEFAULT_ACCURACY))
    if accuracy <= 0:
        raise ConfigError("accuracy must be positive")

    budget_data = data.get("budget", {})
    try:
        budget = Budget(
            max_seconds=budget_data.get("max_seconds"),
            max_iterations=budget_data.get("max_iterations"),
            accuracy=accuracy,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    device_data = data.get("device", {})
    try:
        device = DeviceModel(
            c1=float(device_data.get("c1", SUPERCONDUCTING.c1)),
            c2=float(device_data.get("c2", SUPERCONDUCTING.c2)),
            c3=float(device_data.get("c3", SUPERCONDUCTING.c3)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    config = CampaignConfig(
        problem_ref=str(data["problem"]),
        solvers=tuple(specs),
        seeds=seeds,
        master_seed=int(data.get("master_seed", 0)),
        budget=budget,
        device=device,
        accuracy=accuracy,
        out_dir=data.get("out_dir"),
    )
    try:
        config.load_problem()
    except (OSError, ValueError) as exc:
        raise ConfigError(f"problem {config.problem_ref!r}: {exc}") from None
    return config


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def initial_point(problem: Problem, master_seed: int, seed: int) -> np.ndarray:
    """Per-seed initial point, uniform over the parameter period [-pi, pi)."""
    rng = np.random.default_rng([master_seed, seed])
    return rng.uniform(-math.pi, math.pi, problem.param_count)


def solver_rng(master_seed: int, seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng([master_seed, seed, zlib.crc32(label.encode())])


def _run_one(args) -> Trajectory:
    config, spec, seed = args
    problem = config.load_problem()
    theta0 = initial_point(problem, config.master_seed, seed)
    rng = solver_rng(config.master_seed, seed, spec.label)
    return spec.run(problem, config.device, rng, config.budget, theta0)


def run_campaign(config: CampaignConfig, jobs: int = 1) -> Dict[str, List[Trajectory]]:
    """Run every (solver, seed) pair; returns trajectories grouped by label.

    Results are collected in submission order regardless of worker timing,
    so parallel runs write the same bytes as serial ones.
    """
    tasks = [(config, spec, seed) for spec in config.solvers for seed in config.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(task) for task in tasks]
    grouped: Dict[str, List[Trajectory]] = {spec.label: [] for spec in config.solvers}
    for (_, spec, _), trajectory in zip(tasks, results):
        grouped[spec.label].append(trajectory)
    return grouped


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    """Shortest exact decimal for floats; empty for missing fields."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trajectory_csv(trajectory: Trajectory) -> str:
    """CSV text, one row per iteration plus the zero-cost initial row."""
    fstar = trajectory.fstar
    lines = [TRAJECTORY_COLUMNS]
    initial_gap = abs(trajectory.initial_exact_f - fstar)
    lines.append(",".join([
        "0", _fmt(trajectory.initial_exact_f), _fmt(initial_gap),
        "", "", "", "", "", "", "", "0", "0", "0", _fmt(0.0),
    ]))
    for rec in trajectory.records:
        lines.append(",".join([
            str(rec.iteration),
            _fmt(rec.exact_f),
            _fmt(abs(rec.exact_f - fstar)),
            _fmt(rec.f0_est),
            _fmt(rec.fs_est),
            _fmt(rec.grad_norm_est),
            _fmt(rec.alpha),
            _fmt(rec.accepted),
            _fmt(rec.n_f),
            str(int(sum(rec.n_g))),
            str(rec.costs.shots),
            str(rec.costs.switches),
            str(rec.costs.communications),
            _fmt(rec.wall_clock_s),
        ]))
    return "\n".join(lines) + "\n"


def _to_jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return INFINITY_MARKER
    return value


def _stat_block(values: Sequence[float]) -> Dict[str, object]:
    mean = sum(values) / len(values)
    return {
        "q25": _to_jsonable(quantile(values, 0.25)),
        "q50": _to_jsonable(quantile(values, 0.50)),
        "q75": _to_jsonable(quantile(values, 0.75)),
        "mean": _to_jsonable(mean),
    }


def summarize(config: CampaignConfig, grouped: Dict[str, List[Trajectory]]) -> dict:
    """Per-solver quantiles/means of the metered costs to reach the accuracy
    threshold.  Runs that never reach it contribute the infinity marker."""
    solvers = {}
    for label, runs in grouped.items():
        shots, switches, comms, seconds = [], [], [], []
        reached = 0
        for trajectory in runs:
            threshold = config.accuracy
            if abs(trajectory.initial_exact_f - trajectory.fstar) <= threshold:
                record_costs = CostSnapshot(0, 0, 0)
            else:
                record = trajectory.first_crossing(threshold)
                record_costs = None if record is None else record.costs
            if record_costs is None:
                shots.append(math.inf)
                switches.append(math.inf)
                comms.append(math.inf)
                seconds.append(math.inf)
            else:
                reached += 1
                shots.append(float(record_costs.shots))
                switches.append(float(record_costs.switches))
                comms.append(float(record_costs.communications))
                seconds.append(config.device.seconds(record_costs))
        solvers[label] = {
            "reached": reached,
            "total": len(runs),
            "shots": _stat_block(shots),
            "switches": _stat_block(switches),
            "communications": _stat_block(comms),
            "wall_clock_s": _stat_block(seconds),
        }
    return {
        "problem": config.problem_ref,
        "accuracy": config.accuracy,
        "master_seed": config.master_seed,
        "seeds": list(config.seeds),
        "device": {"c1": config.device.c1, "c2": config.device.c2,
                   "c3": config.device.c3},
        "solvers": solvers,
    }


def write_campaign(config: CampaignConfig, grouped: Dict[str, List[Trajectory]],
                   out_dir: Path) -> dict:
    """Write one trajectory CSV per (solver, seed) and the summary JSON."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, runs in grouped.items():
        for seed, trajectory in zip(config.seeds, runs):
            path = out_dir / f"{label}__seed{seed}.csv"
            path.write_text(trajectory_csv(trajectory), encoding="utf-8")
    summary = summarize(config, grouped)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def sweep_csv(result: SweepResult) -> str:
    crossing = "" if result.crossing is None else repr(result.crossing)
    lines = [SWEEP_COLUMNS]
    for row in result.rows:
        lines.append(",".join([
            repr(row.ratio),
            repr(float(row.q25)),
            repr(float(row.q50)),
            repr(float(row.q75)),
            crossing,
        ]))
    return "\n".join(lines) + "\n"


def run_sweep(config: CampaignConfig, ratios: Sequence[float],
              jobs: int = 1) -> SweepResult:
    """Fig-2 style study: record both solvers once per seed (unit recording
    device, c3 = 0 by re-pricing), then price the ratio grid from the ledgers.

    The config must name exactly two solvers; the first is the numerator.
    A seconds budget would tie stopping to the recording device, so sweeps
    run on iterations and the accuracy monitor alone.
    """
    if len(config.solvers) != 2:
        raise ConfigError("sweep needs exactly two solvers in the config")
    if not ratios:
        raise ConfigError("empty ratio grid")
    if any(r <= 0 for r in ratios):
        raise ConfigError("ratios must be positive")
    budget = Budget(
        max_seconds=None,
        max_iterations=config.budget.max_iterations or 100_000,
        accuracy=config.accuracy,
    )
    recording = CampaignConfig(
        problem_ref=config.problem_ref,
        solvers=config.solvers,
        seeds=config.seeds,
        master_seed=config.master_seed,
        budget=budget,
        device=DeviceModel(c1=1.0, c2=1.0, c3=0.0),
        accuracy=config.accuracy,
        out_dir=config.out_dir,
    )
    grouped = run_campaign(recording, jobs=jobs)
    label_a, label_b = (spec.label for spec in config.solvers)
    return sweep_from_trajectories(
        grouped[label_a], grouped[label_b], ratios, config.accuracy
    )
