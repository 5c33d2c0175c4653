"""Batched mean/variance estimation, adaptive sample-size rules, and cost metering.

Three events are metered: shots (one measurement execution), switches (one
distinct circuit inside a communication batch, regardless of its shot count),
and communications (one optimizer <-> device exchange).  A device model prices
a ledger as

    seconds = c1 * shots + c2 * switches + c3 * communications.

The sample-size rules implement the Chebyshev gradient rule (per coordinate)

    N_i = ceil( s_i^2 / (p * max{L * alpha * |g_i|, eps_g}^2) )

and the two-branch function rule

    N_f = min( ceil(s_f^2 / (p * (alpha^2 ||g||^2)^2)), ceil(s_f^2 / eps_f^2) ),

both floored at 2 so sample variances exist and capped at a configurable
per-request maximum (the function rule explodes when the gradient estimate is
tiny while the variance is not; truncation is logged, never silent).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .sim import Problem, shot_distribution

logger = logging.getLogger(__name__)

# Per-request cap on any single sample size.  Keeps desk-scale runs bounded.
DEFAULT_SAMPLE_CAP = 10_000_000


class CostSnapshot(NamedTuple):
    shots: int
    switches: int
    communications: int


@dataclass(frozen=True)
class DeviceModel:
    """Seconds per shot (c1), per circuit switch (c2), per communication (c3)."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        for name, value in (("c1", self.c1), ("c2", self.c2), ("c3", self.c3)):
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {value!r}")

    def seconds(self, snapshot: CostSnapshot) -> float:
        return (
            self.c1 * snapshot.shots
            + self.c2 * snapshot.switches
            + self.c3 * snapshot.communications
        )


# Forward-looking superconducting hardware constants used throughout.
SUPERCONDUCTING = DeviceModel(c1=1.0e-5, c2=0.1, c3=4.0)


class CostLedger:
    """Monotone counters for one run.  Owned by exactly one trajectory."""

    def __init__(self):
        self.shots = 0
        self.switches = 0
        self.communications = 0

    def add_shots(self, count: int):
        if count < 0:
            raise ValueError("shot count must be nonnegative")
        self.shots += count

    def charge_batch(self, distinct_circuits: int, total_shots: int):
        """One communication covering ``distinct_circuits`` circuits.

        Within a batch each distinct circuit incurs exactly one switch no
        matter how many shots it receives.
        """
        if distinct_circuits <= 0 or total_shots <= 0:
            raise ValueError("batch must contain at least one circuit and one shot")
        self.communications += 1
        self.switches += distinct_circuits
        self.shots += total_shots

    def snapshot(self) -> CostSnapshot:
        return CostSnapshot(self.shots, self.switches, self.communications)

    def seconds(self, device: DeviceModel) -> float:
        return device.seconds(self.snapshot())


@dataclass(frozen=True)
class EstimateWithStats:
    """Sample mean with its unbiased sample variance (divisor N-1)."""

    mean: float
    sample_variance: float
    sample_count: int

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "EstimateWithStats":
        values = np.asarray(values, dtype=float)
        if values.size < 2:
            raise ValueError("need at least 2 samples for a sample variance")
        return cls(
            mean=float(values.mean()),
            sample_variance=float(values.var(ddof=1)),
            sample_count=int(values.size),
        )


def estimate_f(
    problem: Problem,
    theta: np.ndarray,
    count: int,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
) -> EstimateWithStats:
    """Average of ``count`` single-shot objective estimates.

    Billed as one batch: t_f distinct circuits, count * t_f shots.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    values = shot_distribution(problem, theta).sample(count, rng)
    if ledger is not None:
        ledger.charge_batch(problem.circuits_per_f, count * problem.circuits_per_f)
    return EstimateWithStats.from_samples(values)


def estimate_f_pair(
    problem: Problem,
    theta_a: np.ndarray,
    theta_b: np.ndarray,
    count: int,
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
) -> Tuple[EstimateWithStats, EstimateWithStats]:
    """Objective estimates at two points inside a single communication batch.

    This is the line-search shape: both the incumbent and the trial point are
    measured in one exchange, charging 2 * t_f switches and one communication.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    values_a = shot_distribution(problem, theta_a).sample(count, rng)
    values_b = shot_distribution(problem, theta_b).sample(count, rng)
    if ledger is not None:
        ledger.charge_batch(
            2 * problem.circuits_per_f, 2 * count * problem.circuits_per_f
        )
    return (
        EstimateWithStats.from_samples(values_a),
        EstimateWithStats.from_samples(values_b),
    )


def gradient_draws(
    problem: Problem,
    theta: np.ndarray,
    counts: Sequence[int],
    rng: np.random.Generator,
) -> List[np.ndarray]:
    """Raw per-coordinate arrays of single-shot partial-derivative draws.

    Coordinate i gets counts[i] draws, each half the difference of
    independent single-shot values at the two shifted points.  No billing.
    """
    theta = np.asarray(theta, dtype=float)
    if len(counts) != problem.param_count:
        raise ValueError(
            f"got {len(counts)} counts for {problem.param_count} parameters"
        )
    draws = []
    for i, count in enumerate(counts):
        if count < 1:
            raise ValueError("per-coordinate count must be positive")
        shifted = theta.copy()
        shifted[i] = theta[i] + 0.5 * math.pi
        plus = shot_distribution(problem, shifted).sample(count, rng)
        shifted[i] = theta[i] - 0.5 * math.pi
        minus = shot_distribution(problem, shifted).sample(count, rng)
        draws.append(0.5 * (plus - minus))
    return draws


def charge_gradient_batch(problem: Problem, counts: Sequence[int], ledger: CostLedger):
    """Bill one gradient batch: t_g switches, 2 * t_f shots per draw."""
    total_shots = int(sum(2 * problem.circuits_per_f * int(c) for c in counts))
    ledger.charge_batch(problem.circuits_per_g, total_shots)


def vector_variance(stats: Sequence[EstimateWithStats]) -> float:
    """Variance summary of a vector estimate: the infinity norm of the
    per-coordinate sample variances."""
    return max(s.sample_variance for s in stats)


def estimate_grad(
    problem: Problem,
    theta: np.ndarray,
    counts: Sequence[int],
    rng: np.random.Generator,
    ledger: CostLedger | None = None,
) -> Tuple[np.ndarray, List[EstimateWithStats]]:
    """Coordinate-wise averaged gradient estimate with per-coordinate stats.

    Summarize the vector-level variance with :func:`vector_variance` where a
    single number is wanted; the sizing rules here work per coordinate.
    """
    counts = [int(c) for c in counts]
    if any(c < 2 for c in counts):
        raise ValueError("each per-coordinate count must be at least 2")
    draws = gradient_draws(problem, theta, counts, rng)
    if ledger is not None:
        charge_gradient_batch(problem, counts, ledger)
    stats = [EstimateWithStats.from_samples(d) for d in draws]
    grad = np.array([s.mean for s in stats])
    return grad, stats


# ---------------------------------------------------------------------------
# Sample-size policies
# ---------------------------------------------------------------------------

def _check_probability(p: float):
    if not 0.0 < p < 0.5:
        raise ValueError(f"p must lie in (0, 1/2), got {p!r}")


def _ceil_capped(raw: float, cap: int) -> Tuple[int, bool]:
    if raw <= 2.0:
        return 2, False
    if raw > cap:
        return cap, True
    return int(math.ceil(raw)), False


def gradient_sample_sizes(
    prev_variances: Sequence[float],
    alpha: float,
    prev_grad: Sequence[float],
    lipschitz: float,
    p: float,
    eps_g: float,
    cap: int = DEFAULT_SAMPLE_CAP,
) -> np.ndarray:
    """Per-coordinate Chebyshev sample sizes N_i for the gradient estimate.

    ``prev_variances`` and ``prev_grad`` come from the previous iteration
    (variance bootstrapping); the rule is evaluated with the current step
    size.  Sizes are floored at 2 and capped with a logged truncation.
    """
    _check_probability(p)
    if eps_g <= 0:
        raise ValueError("eps_g must be positive")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if lipschitz < 1:
        raise ValueError("lipschitz bound is normalized to be >= 1")
    prev_variances = np.asarray(prev_variances, dtype=float)
    prev_grad = np.asarray(prev_grad, dtype=float)
    if prev_variances.shape != prev_grad.shape:
        raise ValueError("variance and gradient vectors must have equal length")
    sizes = np.empty(prev_variances.size, dtype=int)
    truncated = 0
    for i, (var, g) in enumerate(zip(prev_variances, prev_grad)):
        threshold = max(lipschitz * alpha * abs(g), eps_g)
        sizes[i], hit = _ceil_capped(var / (p * threshold * threshold), cap)
        truncated += hit
    if truncated:
        logger.warning(
            "gradient sample sizes truncated to cap %d for %d coordinate(s)",
            cap,
            truncated,
        )
    return sizes


def function_sample_size(
    prev_variance: float,
    alpha: float,
    grad_norm_sq: float,
    p: float,
    eps_f: float,
    cap: int = DEFAULT_SAMPLE_CAP,
) -> int:
    """Two-branch function sample size N_f.

    The first branch targets the sufficient-decrease scale (alpha^2 ||g||^2)^2
    and dominates early; the second branch ceil(s^2 / eps_f^2) is the
    accuracy-floor guarantee and dominates as the gradient estimate vanishes.
    """
    _check_probability(p)
    if eps_f <= 0:
        raise ValueError("eps_f must be positive")
    if prev_variance < 0:
        raise ValueError("variance must be nonnegative")
    decrease_scale = alpha * alpha * grad_norm_sq
    if decrease_scale > 0:
        first = prev_variance / (p * decrease_scale * decrease_scale)
    else:
        first = math.inf
    second = prev_variance / (eps_f * eps_f)
    size, hit = _ceil_capped(min(first, second), cap)
    if hit:
        logger.warning("function sample size truncated to cap %d", cap)
    return size


def lipschitz_bound(problem: Problem) -> float:
    """Scalar bound L on every non-mixed second derivative, floored at 1.

    Shifting the two-point rule twice bounds |d^2 f / d theta_i^2| by the sum
    of |a_j| over sampled terms (constants drop out of derivatives); the
    floor at 1 matches the normalization the step-size rules assume.
    """
    per_coordinate = sum(abs(a) for a, _ in problem.hamiltonian.sampled_terms)
    return max(1.0, float(per_coordinate))
