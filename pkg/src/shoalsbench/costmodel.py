"""Closed-form worst-case cost calculators, the breakeven rule, and c1/c2 sweeps.

The worst-case calculators instantiate the per-iteration latency and shot
costs of the line-search and stochastic-gradient methods with all big-O
constants set to 1; they are order-of-magnitude predictors, not forecasts.

Sweeps exploit that optimizer decisions never read the clock: a recorded
trajectory's ledger snapshots can be re-priced under any device model
exactly, so varying c1/c2 needs one simulation pass, not one per ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .estimators import CostSnapshot, DeviceModel
from .optimizers import Budget, Trajectory
from .sim import Problem

# A solver runner: (problem, device, rng, budget, theta0) -> Trajectory.
SolverRunner = Callable[..., Trajectory]


@dataclass(frozen=True)
class CostInputs:
    """Everything Table-style worst-case totals depend on."""

    n: int
    t_f: int
    t_g: int
    lipschitz: float
    f_gap: float
    eps: float
    batch: int
    device: DeviceModel

    def __post_init__(self):
        if self.n < 1 or self.t_f < 1 or self.t_g < 1:
            raise ValueError("n, t_f, t_g must be positive")
        if self.lipschitz < 1:
            raise ValueError("lipschitz is normalized to be >= 1")
        if self.f_gap < 0:
            raise ValueError("f_gap must be nonnegative")
        if self.batch < 1:
            raise ValueError("batch must be positive")


@dataclass(frozen=True)
class WorstCaseCost:
    iterations: float
    per_iteration_latency_s: float
    per_iteration_shots_s: float
    total_s: float


def _check_eps(eps: float):
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")


def shoals_worst_case_cost(inputs: CostInputs) -> WorstCaseCost:
    """Worst-case line-search total: O(L^2 gap / eps^2) iterations, each
    paying latency c2*(2 t_f + t_g) + 2 c3 and shots c1*(t_g/eps^2 + 2 t_f/eps^4)."""
    _check_eps(inputs.eps)
    device = inputs.device
    eps_sq = inputs.eps * inputs.eps
    iterations = inputs.lipschitz ** 2 * inputs.f_gap / eps_sq
    latency = device.c2 * (2 * inputs.t_f + inputs.t_g) + 2.0 * device.c3
    shots = device.c1 * (inputs.t_g / eps_sq + 2.0 * inputs.t_f / eps_sq ** 2)
    return WorstCaseCost(iterations, latency, shots, iterations * (latency + shots))


def sg_worst_case_cost(inputs: CostInputs) -> WorstCaseCost:
    """Worst-case stochastic-gradient total: O(L gap / eps^4) iterations,
    each paying latency c2*t_g + c3 and shots b*c1*t_g."""
    _check_eps(inputs.eps)
    device = inputs.device
    iterations = inputs.lipschitz * inputs.f_gap / inputs.eps ** 4
    latency = device.c2 * inputs.t_g + device.c3
    shots = inputs.batch * device.c1 * inputs.t_g
    return WorstCaseCost(iterations, latency, shots, iterations * (latency + shots))


def breakeven_c1(n: int, t_f: int, c2: float, c3: float,
                 lipschitz: float, eps_sq: float) -> float:
    """Shot-time threshold below which the line search wins on total cost.

    ``eps_sq`` is the squared accuracy scale (the role eps_f plays in
    practice).  Assumes t_g = 2 n t_f and unit batch:

        c1 < eps_sq * (2 n t_f c2 + c3) / (2 t_f L).
    """
    if lipschitz < 1:
        raise ValueError("lipschitz is normalized to be >= 1")
    return eps_sq * (2.0 * n * t_f * c2 + c3) / (2.0 * t_f * lipschitz)


def reprice(snapshot: CostSnapshot, device: DeviceModel) -> float:
    """Wall-clock seconds of a recorded ledger under a different device.

    Exact because shot sequences are device-independent.
    """
    return device.seconds(snapshot)


def quantile(values: Sequence[float], q: float) -> float:
    """Linear interpolation between order statistics.

    This one convention backs every reported quantile (summaries, sweeps),
    so downstream tools can reproduce them bit-for-bit.  Handles infinities:
    if both bracketing order statistics are infinite the quantile is that
    infinity rather than nan.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    ordered = sorted(float(v) for v in values)
    if not ordered:
        raise ValueError("no values")
    position = (len(ordered) - 1) * q
    lo = math.floor(position)
    hi = math.ceil(position)
    if ordered[lo] == ordered[hi]:
        return ordered[lo]
    weight = position - lo
    return (1.0 - weight) * ordered[lo] + weight * ordered[hi]


@dataclass(frozen=True)
class SweepRow:
    ratio: float          # c1 / c2
    q25: float
    q50: float
    q75: float


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[SweepRow, ...]
    crossing: Optional[float]  # c1/c2 where the median ratio equals 1


def _crossing_snapshot(trajectory: Trajectory, threshold: float) -> Optional[CostSnapshot]:
    if abs(trajectory.initial_exact_f - trajectory.fstar) <= threshold:
        return CostSnapshot(0, 0, 0)
    record = trajectory.first_crossing(threshold)
    return None if record is None else record.costs


def sweep_from_trajectories(
    runs_a: Sequence[Trajectory],
    runs_b: Sequence[Trajectory],
    ratios: Sequence[float],
    threshold: float,
    c2: float = 1.0,
) -> SweepResult:
    """Re-price recorded runs over a c1/c2 grid with c3 = 0.

    For each ratio, reports the 25/50/75 percentiles of
    time_a / time_b to reach ``threshold`` accuracy over the paired runs.
    A run that never reached the threshold contributes an infinite time
    (and the pair an infinite or zero ratio), mirroring the "never
    converged" convention in summary tables.
    """
    if len(runs_a) != len(runs_b) or not runs_a:
        raise ValueError("need equally many (and at least one) runs per solver")
    if not ratios:
        raise ValueError("empty ratio grid")
    if any(r <= 0 for r in ratios) or c2 <= 0:
        raise ValueError("ratios and c2 must be positive")
    snaps_a = [_crossing_snapshot(t, threshold) for t in runs_a]
    snaps_b = [_crossing_snapshot(t, threshold) for t in runs_b]
    rows = []
    for ratio in ratios:
        device = DeviceModel(c1=ratio * c2, c2=c2, c3=0.0)
        pair_ratios = []
        for snap_a, snap_b in zip(snaps_a, snaps_b):
            time_a = math.inf if snap_a is None else device.seconds(snap_a)
            time_b = math.inf if snap_b is None else device.seconds(snap_b)
            if math.isinf(time_a) and math.isinf(time_b):
                pair_ratios.append(math.nan)
            elif math.isinf(time_b):
                pair_ratios.append(0.0)
            else:
                pair_ratios.append(time_a / time_b)
        defined = [r for r in pair_ratios if not math.isnan(r)]
        if not defined:
            raise ValueError(f"no run of either solver reached accuracy {threshold}")
        rows.append(SweepRow(
            ratio=float(ratio),
            q25=quantile(defined, 0.25),
            q50=quantile(defined, 0.50),
            q75=quantile(defined, 0.75),
        ))
    return SweepResult(rows=tuple(rows), crossing=_median_crossing(rows))


def _median_crossing(rows: List[SweepRow]) -> Optional[float]:
    """c1/c2 where the median ratio crosses 1, via log-linear interpolation
    between adjacent grid points (medians and ratios on log scales)."""
    ordered = sorted(rows, key=lambda r: r.ratio)
    for left, right in zip(ordered, ordered[1:]):
        m_left, m_right = left.q50, right.q50
        if m_left <= 0 or m_right <= 0 or math.isinf(m_left) or math.isinf(m_right):
            continue
        if (m_left - 1.0) * (m_right - 1.0) > 0:
            continue
        if m_left == m_right:
            return left.ratio
        log_gap = math.log(m_right) - math.log(m_left)
        fraction = (0.0 - math.log(m_left)) / log_gap
        return math.exp(
            math.log(left.ratio)
            + fraction * (math.log(right.ratio) - math.log(left.ratio))
        )
    return None


def sweep_ratio(
    problem: Problem,
    solver_a: SolverRunner,
    solver_b: SolverRunner,
    ratios: Sequence[float],
    seeds: Sequence[int],
    budget: Budget,
    threshold: float = 0.0016,
    master_seed: int = 0,
) -> SweepResult:
    """Simulate both solvers once per seed, then re-price over the ratio grid.

    Initial points are drawn once per seed and shared by both solvers.  The
    recording device is irrelevant to the outcome (decisions never read the
    clock), so runs are recorded under a unit device and re-priced.  The
    budget should be iteration-based: a seconds budget would couple stopping
    to the recording device and break the re-pricing identity.
    """
    if budget.max_seconds is not None:
        raise ValueError("sweep budgets must be iteration-based, not seconds-based")
    recording_device = DeviceModel(c1=1.0, c2=1.0, c3=0.0)
    runs_a, runs_b = [], []
    for seed in seeds:
        init_rng = np.random.default_rng([master_seed, seed])
        theta0 = init_rng.uniform(-math.pi, math.pi, problem.param_count)
        rng_a = np.random.default_rng([master_seed, seed, 1])
        rng_b = np.random.default_rng([master_seed, seed, 2])
        runs_a.append(solver_a(problem, recording_device, rng_a, budget, theta0))
        runs_b.append(solver_b(problem, recording_device, rng_b, budget, theta0))
    return sweep_from_trajectories(runs_a, runs_b, ratios, threshold)
