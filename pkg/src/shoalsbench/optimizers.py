"""Shot-adaptive line search (SHOALS) and stochastic-gradient baselines.

All solvers share one run interface: they consume a problem, a device model,
a seeded generator, and a budget, and they produce a :class:`Trajectory`
whose per-iteration records carry estimates, step sizes, sample sizes, and
cumulative metered costs.  The exact objective is evaluated once per
iteration purely for monitoring (convergence to the known optimum and a
divergence guard); it is never billed to the ledger.

SHOALS per iteration: estimate the gradient coordinate-wise with
Chebyshev-rule sample sizes (one communication), form the trial point
theta - alpha * g, measure the objective at both points with the two-branch
sample size inside a single second communication, and accept when

    f_s <= f_0 - c * alpha * ||g||^2 + 2 * eps_f,

growing alpha by gamma (capped) on acceptance and shrinking it by gamma on
rejection.  Sample variances measured in iteration k size iteration k+1;
the first gradient estimate is a fixed-size warm-up and the first function
variance is seeded with the analytic single-shot bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .estimators import (
    DEFAULT_SAMPLE_CAP,
    CostLedger,
    CostSnapshot,
    DeviceModel,
    charge_gradient_batch,
    estimate_f_pair,
    estimate_grad,
    function_sample_size,
    gradient_draws,
    gradient_sample_sizes,
    lipschitz_bound,
)
from .sim import Problem, exact_objective

DEFAULT_ACCURACY = 0.0016  # chemical accuracy, also the default eps_f


def sufficient_decrease(f0: float, fs: float, alpha: float, grad_norm_sq: float,
                        c: float, eps_f: float) -> bool:
    """Relaxed Armijo acceptance test: fs <= f0 - c*alpha*||g||^2 + 2*eps_f.

    With exact function values and eps_f = 0 this is the classical
    sufficient-decrease inequality; the 2*eps_f slack absorbs the allowed
    estimation error of the two function estimates.
    """
    return fs <= f0 - c * alpha * grad_norm_sq + 2.0 * eps_f


def icans_shot_rule(variance, gradient, gain_factor, bias_term):
    """Raw iCANS per-coordinate shot recommendation.

    Expected gain per shot is maximized at gain_factor * xi / chi^2 with
    gain_factor = 2*L*alpha / (2 - L*alpha); ``bias_term`` regularizes the
    squared gradient average away from zero early on.
    """
    return gain_factor * variance / (gradient * gradient + bias_term)


@dataclass(frozen=True)
class ShoalsConfig:
    """Line-search constants.  Defaults are the standard, untuned settings."""

    gamma: float = 2.0
    c: float = 0.2
    alpha_max: float = 1.0
    alpha0: float = 1.0
    p: float = 0.1
    eps_f: float = DEFAULT_ACCURACY
    eps_g: Optional[float] = None  # None -> sqrt(eps_f)
    warmup_samples: int = 30
    sample_cap: int = DEFAULT_SAMPLE_CAP

    def __post_init__(self):
        if self.gamma <= 1:
            raise ValueError("gamma must exceed 1")
        if not 0 < self.c < 1:
            raise ValueError("c must lie in (0, 1)")
        if self.alpha_max <= 0 or self.alpha0 <= 0:
            raise ValueError("step sizes must be positive")
        if not 0 < self.p < 0.5:
            raise ValueError("p must lie in (0, 1/2)")
        if self.eps_f <= 0:
            raise ValueError("eps_f must be positive")
        if self.eps_g is not None and self.eps_g <= 0:
            raise ValueError("eps_g must be positive")
        if self.warmup_samples < 2:
            raise ValueError("warmup_samples must be at least 2")

    @property
    def resolved_eps_g(self) -> float:
        return math.sqrt(self.eps_f) if self.eps_g is None else self.eps_g


@dataclass
class ShoalsState:
    """Evolving line-search state: the iterate, the step size, and the
    bootstrapped variance/gradient information sizing the next iteration.

    ``alpha`` stays in (0, alpha_max]: it grows by gamma (capped) on
    acceptance and shrinks by gamma on rejection.  ``grad_variances`` and
    ``prev_grad`` are None before the warm-up gradient estimate exists.
    """

    theta: np.ndarray
    alpha: float
    f_variance: float
    grad_variances: Optional[np.ndarray] = None
    prev_grad: Optional[np.ndarray] = None
    iteration: int = 0


@dataclass(frozen=True)
class Budget:
    """Stopping rule: simulated seconds and/or iterations, plus the accuracy
    monitor.  ``accuracy`` of None disables early stopping at the optimum."""

    max_seconds: Optional[float] = None
    max_iterations: Optional[int] = None
    accuracy: Optional[float] = DEFAULT_ACCURACY

    def __post_init__(self):
        if self.max_seconds is None and self.max_iterations is None:
            raise ValueError("budget needs max_seconds and/or max_iterations")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.accuracy is not None and self.accuracy <= 0:
            raise ValueError("accuracy must be positive")


@dataclass(frozen=True)
class IterationRecord:
    """One optimizer iteration.  ``alpha`` is the step size actually used;
    cost fields are cumulative after the iteration's batches."""

    iteration: int
    exact_f: float
    f0_est: Optional[float]
    fs_est: Optional[float]
    grad_norm_est: float
    alpha: float
    accepted: bool
    n_f: Optional[int]
    n_g: Tuple[int, ...]
    costs: CostSnapshot
    wall_clock_s: float


@dataclass
class Trajectory:
    problem: str
    solver: str
    fstar: float
    initial_exact_f: float
    device: DeviceModel
    records: List[IterationRecord] = field(default_factory=list)
    status: str = "incomplete"  # converged | incomplete | diverged
    final_theta: Optional[np.ndarray] = None

    def first_crossing(self, threshold: float) -> Optional[IterationRecord]:
        """First record whose exact objective is within ``threshold`` of f_*.

        Returns None both when the run never crossed and when the initial
        point was already inside (zero cost; check initial_exact_f).
        """
        for record in self.records:
            if abs(record.exact_f - self.fstar) <= threshold:
                return record
        return None

    def time_to_accuracy(
        self, threshold: float, device: Optional[DeviceModel] = None
    ) -> float:
        """Simulated seconds until the exact objective first came within
        ``threshold`` of f_*, re-priced under ``device`` if given.  Infinity
        when the run never got there."""
        if abs(self.initial_exact_f - self.fstar) <= threshold:
            return 0.0
        record = self.first_crossing(threshold)
        if record is None:
            return math.inf
        pricing = self.device if device is None else device
        return pricing.seconds(record.costs)


class _RunMonitor:
    """Budget, convergence, and divergence bookkeeping shared by all solvers."""

    def __init__(self, problem: Problem, device: DeviceModel, budget: Budget,
                 solver: str, theta0: np.ndarray):
        self.problem = problem
        self.device = device
        self.budget = budget
        self.ledger = CostLedger()
        initial = exact_objective(problem, theta0)
        if not math.isfinite(initial):
            raise RuntimeError("initial point has non-finite objective")
        self.divergence_guard = initial + 10.0 * problem.hamiltonian.shot_bound
        self.trajectory = Trajectory(
            problem=problem.name,
            solver=solver,
            fstar=problem.ground_energy(),
            initial_exact_f=initial,
            device=device,
        )
        if (budget.accuracy is not None
                and abs(initial - self.trajectory.fstar) <= budget.accuracy):
            self.trajectory.status = "converged"

    @property
    def done(self) -> bool:
        return self.trajectory.status == "converged"

    def keep_going(self) -> bool:
        """Pre-iteration check: False once the budget is exhausted."""
        budget = self.budget
        if (budget.max_iterations is not None
                and len(self.trajectory.records) >= budget.max_iterations):
            return False
        if (budget.max_seconds is not None
                and self.ledger.seconds(self.device) >= budget.max_seconds):
            return False
        return True

    def record(self, *, exact_f: float, f0_est: Optional[float],
               fs_est: Optional[float], grad_norm_est: float, alpha: float,
               accepted: bool, n_f: Optional[int], n_g: Sequence[int]) -> bool:
        """Append one iteration; True when the run should stop."""
        traj = self.trajectory
        traj.records.append(IterationRecord(
            iteration=len(traj.records) + 1,
            exact_f=exact_f,
            f0_est=f0_est,
            fs_est=fs_est,
            grad_norm_est=grad_norm_est,
            alpha=alpha,
            accepted=accepted,
            n_f=n_f,
            n_g=tuple(int(c) for c in n_g),
            costs=self.ledger.snapshot(),
            wall_clock_s=self.ledger.seconds(self.device),
        ))
        if (self.budget.accuracy is not None
                and abs(exact_f - traj.fstar) <= self.budget.accuracy):
            traj.status = "converged"
            return True
        if exact_f > self.divergence_guard:
            traj.status = "diverged"
            return True
        return False

    def finish(self, theta: np.ndarray) -> Trajectory:
        self.trajectory.final_theta = np.asarray(theta, dtype=float).copy()
        return self.trajectory


def _initial_point(problem: Problem, rng: np.random.Generator,
                   theta0: Optional[np.ndarray]) -> np.ndarray:
    if theta0 is None:
        return rng.uniform(-math.pi, math.pi, problem.param_count)
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (problem.param_count,):
        raise ValueError(f"theta0 has shape {theta0.shape}, expected ({problem.param_count},)")
    return theta0.copy()


def _require_finite(iteration: int, **named):
    for name, value in named.items():
        if not np.all(np.isfinite(value)):
            raise RuntimeError(
                f"non-finite estimate at iteration {iteration}: {name}={value!r}"
            )


def shoals_run(
    problem: Problem,
    config: ShoalsConfig,
    device: DeviceModel,
    rng: np.random.Generator,
    budget: Budget,
    theta0: Optional[np.ndarray] = None,
    solver_label: str = "shoals",
) -> Trajectory:
    """Run the shot-adaptive line search.  Two communications per iteration:
    one gradient batch, one function batch covering both evaluation points."""
    theta = _initial_point(problem, rng, theta0)
    monitor = _RunMonitor(problem, device, budget, solver_label, theta)
    if monitor.done:
        return monitor.finish(theta)
    n = problem.param_count
    lipschitz = lipschitz_bound(problem)
    eps_g = config.resolved_eps_g
    # Analytic variance seed for the first function batch; the first gradient
    # batch is a fixed-size warm-up instead (no previous estimate to size from).
    state = ShoalsState(
        theta=theta,
        alpha=config.alpha0,
        f_variance=problem.hamiltonian.variance_bound,
    )

    while monitor.keep_going():
        state.iteration += 1
        if state.prev_grad is None:
            counts = np.full(n, max(config.warmup_samples, 2), dtype=int)
        else:
            counts = gradient_sample_sizes(
                state.grad_variances, state.alpha, np.abs(state.prev_grad),
                lipschitz, config.p, eps_g, config.sample_cap,
            )
        grad, grad_stats = estimate_grad(problem, state.theta, counts, rng, monitor.ledger)
        grad_norm_sq = float(grad @ grad)
        n_f = function_sample_size(
            state.f_variance, state.alpha, grad_norm_sq,
            config.p, config.eps_f, config.sample_cap,
        )
        trial = state.theta - state.alpha * grad
        f0, fs = estimate_f_pair(problem, state.theta, trial, n_f, rng, monitor.ledger)
        _require_finite(state.iteration, gradient=grad, f0=f0.mean, fs=fs.mean)

        accepted = sufficient_decrease(
            f0.mean, fs.mean, state.alpha, grad_norm_sq, config.c, config.eps_f
        )
        alpha_used = state.alpha
        if accepted:
            state.theta = trial
            state.alpha = min(config.alpha_max, config.gamma * state.alpha)
            state.f_variance = fs.sample_variance
        else:
            state.alpha = state.alpha / config.gamma
            state.f_variance = f0.sample_variance
        state.grad_variances = np.array([s.sample_variance for s in grad_stats])
        state.prev_grad = grad

        stop = monitor.record(
            exact_f=exact_objective(problem, state.theta),
            f0_est=f0.mean,
            fs_est=fs.mean,
            grad_norm_est=math.sqrt(grad_norm_sq),
            alpha=alpha_used,
            accepted=accepted,
            n_f=n_f,
            n_g=counts,
        )
        if stop:
            break
    return monitor.finish(state.theta)


def _batched_gradient(problem, theta, batch, rng, ledger):
    """Uniform-batch gradient estimate with per-coordinate stats (stats are
    None at batch size 1, where no sample variance exists)."""
    counts = [batch] * problem.param_count
    if batch >= 2:
        return estimate_grad(problem, theta, counts, rng, ledger)
    draws = gradient_draws(problem, theta, counts, rng)
    charge_gradient_batch(problem, counts, ledger)
    return np.array([float(d[0]) for d in draws]), None


def sgd_run(
    problem: Problem,
    alpha: float,
    batch: int,
    device: DeviceModel,
    rng: np.random.Generator,
    budget: Budget,
    theta0: Optional[np.ndarray] = None,
    solver_label: Optional[str] = None,
) -> Trajectory:
    """Generic stochastic gradient iteration theta <- theta - alpha * g.

    One communication per iteration; the gradient is the coordinate-wise mean
    of ``batch`` single-shot draws.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if batch < 1:
        raise ValueError("batch must be positive")
    label = solver_label or f"sgd-{batch}"
    theta = _initial_point(problem, rng, theta0)
    monitor = _RunMonitor(problem, device, budget, label, theta)
    if monitor.done:
        return monitor.finish(theta)
    while monitor.keep_going():
        k = len(monitor.trajectory.records) + 1
        grad, _ = _batched_gradient(problem, theta, batch, rng, monitor.ledger)
        _require_finite(k, gradient=grad)
        theta = theta - alpha * grad
        stop = monitor.record(
            exact_f=exact_objective(problem, theta),
            f0_est=None,
            fs_est=None,
            grad_norm_est=float(np.linalg.norm(grad)),
            alpha=alpha,
            accepted=True,
            n_f=None,
            n_g=[batch] * problem.param_count,
        )
        if stop:
            break
    return monitor.finish(theta)


def adam_run(
    problem: Problem,
    alpha: Optional[float],
    batch: int,
    device: DeviceModel,
    rng: np.random.Generator,
    budget: Budget,
    theta0: Optional[np.ndarray] = None,
    beta1: float = 0.9,
    beta2: float = 0.999,
    offset: float = 1e-8,
    solver_label: Optional[str] = None,
) -> Trajectory:
    """Adam with bias correction; step size defaults to 1/L.

    Sampling and cost accounting are identical to :func:`sgd_run`.
    """
    if batch < 1:
        raise ValueError("batch must be positive")
    if alpha is None:
        alpha = 1.0 / lipschitz_bound(problem)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    label = solver_label or f"adam-{batch}"
    theta = _initial_point(problem, rng, theta0)
    monitor = _RunMonitor(problem, device, budget, label, theta)
    if monitor.done:
        return monitor.finish(theta)
    m = np.zeros(problem.param_count)
    v = np.zeros(problem.param_count)
    t = 0
    while monitor.keep_going():
        grad, _ = _batched_gradient(problem, theta, batch, rng, monitor.ledger)
        t += 1
        _require_finite(t, gradient=grad)
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        theta = theta - alpha * m_hat / (np.sqrt(v_hat) + offset)
        stop = monitor.record(
            exact_f=exact_objective(problem, theta),
            f0_est=None,
            fs_est=None,
            grad_norm_est=float(np.linalg.norm(grad)),
            alpha=alpha,
            accepted=True,
            n_f=None,
            n_g=[batch] * problem.param_count,
        )
        if stop:
            break
    return monitor.finish(theta)


def icans_run(
    problem: Problem,
    device: DeviceModel,
    rng: np.random.Generator,
    budget: Budget,
    theta0: Optional[np.ndarray] = None,
    s_min: int = 30,
    alpha: Optional[float] = None,
    ewma: float = 0.99,
    bias: float = 1e-6,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    solver_label: str = "icans",
) -> Trajectory:
    """iCANS1: per-coordinate shot counts chosen to maximize expected gain
    per shot.

    Gradient components and their single-shot variances feed bias-corrected
    exponentially weighted moving averages chi_i and xi_i; the next shot
    count per coordinate is

        s_i = ceil( 2*L*alpha / (2 - L*alpha) * xi_i / (chi_i^2 + bias*ewma^k) )

    clipped below by ``s_min`` (the "iCANS1" rule) and above by the global
    per-request cap.  Step size defaults to 1/L, for which the gain factor
    2*L*alpha / (2 - L*alpha) equals 2; the expected-gain model requires
    L*alpha < 2.
    """
    if s_min < 2:
        raise ValueError("s_min must be at least 2")
    if not 0 < ewma < 1:
        raise ValueError("ewma constant must lie in (0, 1)")
    lipschitz = lipschitz_bound(problem)
    if alpha is None:
        alpha = 1.0 / lipschitz
    gain_scale = lipschitz * alpha
    if not 0 < gain_scale < 2:
        raise ValueError("iCANS requires 0 < L*alpha < 2")
    gain_factor = 2.0 * gain_scale / (2.0 - gain_scale)

    theta = _initial_point(problem, rng, theta0)
    monitor = _RunMonitor(problem, device, budget, solver_label, theta)
    if monitor.done:
        return monitor.finish(theta)
    n = problem.param_count
    counts = np.full(n, s_min, dtype=int)
    chi_raw = np.zeros(n)
    xi_raw = np.zeros(n)
    k = 0
    while monitor.keep_going():
        grad, stats = estimate_grad(problem, theta, counts, rng, monitor.ledger)
        _require_finite(k + 1, gradient=grad)
        variances = np.array([s.sample_variance for s in stats])
        chi_raw = ewma * chi_raw + (1.0 - ewma) * grad
        xi_raw = ewma * xi_raw + (1.0 - ewma) * variances
        correction = 1.0 - ewma ** (k + 1)
        chi = chi_raw / correction
        xi = xi_raw / correction
        theta = theta - alpha * grad
        recommended = icans_shot_rule(xi, chi, gain_factor, bias * ewma ** k)
        used = counts
        counts = np.clip(
            np.ceil(np.where(np.isfinite(recommended), recommended, sample_cap)),
            s_min,
            sample_cap,
        ).astype(int)
        k += 1
        stop = monitor.record(
            exact_f=exact_objective(problem, theta),
            f0_est=None,
            fs_est=None,
            grad_norm_est=float(np.linalg.norm(grad)),
            alpha=alpha,
            accepted=True,
            n_f=None,
            n_g=used,
        )
        if stop:
            break
    return monitor.finish(theta)
