import logging
import math

import numpy as np
import pytest

from shoalsbench.estimators import (
    CostLedger,
    CostSnapshot,
    DeviceModel,
    EstimateWithStats,
    SUPERCONDUCTING,
    estimate_f,
    estimate_f_pair,
    estimate_grad,
    function_sample_size,
    gradient_sample_sizes,
    lipschitz_bound,
)
from shoalsbench.pauli import parse_hamiltonian
from shoalsbench.sim import exact_gradient, shot_distribution


# ---------------------------------------------------------------------------
# Ledger and device pricing
# ---------------------------------------------------------------------------

def test_batch_counters():
    ledger = CostLedger()
    ledger.charge_batch(5, 500)
    assert ledger.snapshot() == CostSnapshot(500, 5, 1)
    ledger.charge_batch(40, 40)
    assert ledger.snapshot() == CostSnapshot(540, 45, 2)


def test_two_batches_example():
    ledger = CostLedger()
    ledger.charge_batch(5, 100)
    ledger.charge_batch(40, 40)
    assert ledger.snapshot() == CostSnapshot(140, 45, 2)


def test_shoals_iteration_latency_h2_stats():
    # One gradient batch (t_g = 40 circuits) plus one function batch covering
    # both points (2 * t_f = 10 circuits): latency 0.1 * 50 + 2 * 4.0 = 13 s.
    latency_only = DeviceModel(c1=0.0, c2=0.1, c3=4.0)
    ledger = CostLedger()
    ledger.charge_batch(40, 1234)
    ledger.charge_batch(10, 999)
    assert ledger.seconds(latency_only) == 13.0


def test_pricing_is_exactly_linear(rng):
    for _ in range(50):
        snap = CostSnapshot(int(rng.integers(0, 10 ** 9)),
                            int(rng.integers(0, 10 ** 6)),
                            int(rng.integers(0, 10 ** 4)))
        device = DeviceModel(*np.abs(rng.normal(size=3)))
        expected = device.c1 * snap.shots + device.c2 * snap.switches + device.c3 * snap.communications
        assert device.seconds(snap) == expected


def test_ledger_rejects_bad_charges():
    ledger = CostLedger()
    with pytest.raises(ValueError):
        ledger.charge_batch(0, 10)
    with pytest.raises(ValueError):
        ledger.charge_batch(10, 0)
    with pytest.raises(ValueError):
        ledger.add_shots(-1)


def test_device_validation():
    with pytest.raises(ValueError):
        DeviceModel(c1=-1.0, c2=0.0, c3=0.0)
    with pytest.raises(ValueError):
        DeviceModel(c1=math.inf, c2=0.0, c3=0.0)


def test_superconducting_constants():
    assert (SUPERCONDUCTING.c1, SUPERCONDUCTING.c2, SUPERCONDUCTING.c3) == (1.0e-5, 0.1, 4.0)


# ---------------------------------------------------------------------------
# Estimates with statistics
# ---------------------------------------------------------------------------

def test_stats_hand_arithmetic():
    stats = EstimateWithStats.from_samples(np.array([1.0, 1.0, -1.0]))
    assert stats.mean == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert stats.sample_variance == pytest.approx(4.0 / 3.0, abs=1e-15)
    assert stats.sample_count == 3


def test_stats_requires_two_samples():
    with pytest.raises(ValueError):
        EstimateWithStats.from_samples(np.array([1.0]))


def test_estimate_f_deterministic_point(toy1q, rng):
    ledger = CostLedger()
    est = estimate_f(toy1q, np.array([0.0]), 50, rng, ledger)
    assert est.mean == 1.0
    assert est.sample_variance == 0.0
    assert ledger.snapshot() == CostSnapshot(50, 1, 1)


def test_estimate_f_statistics(toy1q, rng):
    est = estimate_f(toy1q, np.array([math.pi / 2]), 10 ** 5, rng)
    assert abs(est.mean) <= 0.0127
    assert est.sample_variance == pytest.approx(1.0, rel=0.05)


def test_estimate_f_requires_two(toy1q, rng):
    with pytest.raises(ValueError):
        estimate_f(toy1q, np.array([0.0]), 1, rng)


def test_estimate_f_pair_single_batch(toy2q, rng):
    ledger = CostLedger()
    a, b = estimate_f_pair(toy2q, np.array([0.1, 0.2]), np.array([0.5, -0.2]), 100, rng, ledger)
    # 2 * t_f = 4 circuits, 2 * 100 * t_f = 400 shots, one communication.
    assert ledger.snapshot() == CostSnapshot(400, 4, 1)
    assert a.sample_count == b.sample_count == 100


def test_estimate_grad_degenerate(toy1q, rng):
    ledger = CostLedger()
    grad, stats = estimate_grad(toy1q, np.array([math.pi / 2]), [7], rng, ledger)
    assert grad[0] == -1.0
    assert stats[0].sample_variance == 0.0
    # t_g = 2 switches, 7 draws * 2 shifted single-shot estimates * t_f = 14 shots.
    assert ledger.snapshot() == CostSnapshot(14, 2, 1)


def test_estimate_grad_h2_accounting(h2, rng):
    ledger = CostLedger()
    estimate_grad(h2, np.zeros(3), [100, 100, 100], rng, ledger)
    # switches use the published t_g = 40; shots use the sampled circuits.
    assert ledger.snapshot() == CostSnapshot(3000, 40, 1)


def test_estimate_grad_close_to_exact(toy2q, rng):
    theta = np.array([0.4, -1.1])
    grad, stats = estimate_grad(toy2q, theta, [10 ** 4, 10 ** 4], rng)
    exact = exact_gradient(toy2q, theta)
    tolerance = 4.0 * max(math.sqrt(s.sample_variance) for s in stats) / 100.0
    assert np.max(np.abs(grad - exact)) <= tolerance


def test_vector_variance_is_infinity_norm(toy2q, rng):
    from shoalsbench.estimators import vector_variance

    _, stats = estimate_grad(toy2q, np.array([0.7, -0.3]), [50, 50], rng)
    assert vector_variance(stats) == max(s.sample_variance for s in stats)


def test_estimate_grad_count_validation(toy2q, rng):
    with pytest.raises(ValueError, match="counts"):
        estimate_grad(toy2q, np.zeros(2), [5], rng)
    with pytest.raises(ValueError, match="at least 2"):
        estimate_grad(toy2q, np.zeros(2), [5, 1], rng)


def test_single_shot_ledger_charges_shots_only(toy2q, rng):
    from shoalsbench.sim import single_shot_f, single_shot_partial

    ledger = CostLedger()
    single_shot_f(toy2q, np.zeros(2), rng, ledger)
    assert ledger.snapshot() == CostSnapshot(2, 0, 0)
    single_shot_partial(toy2q, np.zeros(2), 0, rng, ledger)
    assert ledger.snapshot() == CostSnapshot(6, 0, 0)


# ---------------------------------------------------------------------------
# Sample-size rules
# ---------------------------------------------------------------------------

def test_gradient_sizes_epsilon_branch():
    sizes = gradient_sample_sizes([1.0], alpha=1.0, prev_grad=[0.02],
                                  lipschitz=1.0, p=0.1, eps_g=0.04)
    assert sizes[0] == 6250


def test_gradient_sizes_zero_variance_floor():
    sizes = gradient_sample_sizes([0.0], alpha=1.0, prev_grad=[5.0],
                                  lipschitz=1.0, p=0.1, eps_g=0.04)
    assert sizes[0] == 2


def test_gradient_sizes_gradient_branch():
    sizes = gradient_sample_sizes([1.0], alpha=1.0, prev_grad=[0.1],
                                  lipschitz=1.0, p=0.1, eps_g=0.04)
    assert sizes[0] == 1000


def test_gradient_sizes_cap_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="shoalsbench.estimators"):
        sizes = gradient_sample_sizes([1.0], alpha=1.0, prev_grad=[0.0],
                                      lipschitz=1.0, p=0.1, eps_g=1e-9, cap=10 ** 7)
    assert sizes[0] == 10 ** 7
    assert any("truncated" in record.message for record in caplog.records)


def test_gradient_sizes_validation():
    with pytest.raises(ValueError):
        gradient_sample_sizes([1.0], 1.0, [0.1], 1.0, p=0.6, eps_g=0.04)
    with pytest.raises(ValueError):
        gradient_sample_sizes([1.0], 1.0, [0.1], 1.0, p=0.1, eps_g=0.0)
    with pytest.raises(ValueError):
        gradient_sample_sizes([1.0], 1.0, [0.1], 0.5, p=0.1, eps_g=0.04)


def test_function_size_min_of_branches():
    n = function_sample_size(0.01, alpha=1.0, grad_norm_sq=0.09, p=0.1, eps_f=0.0016)
    assert n == min(math.ceil(0.01 / (0.1 * 0.09 ** 2)), math.ceil(0.01 / 0.0016 ** 2))
    assert n == 13


def test_function_size_second_branch_when_gradient_vanishes():
    n = function_sample_size(0.01, alpha=1.0, grad_norm_sq=0.0, p=0.1, eps_f=0.0016)
    assert n == math.ceil(0.01 / 0.0016 ** 2)


def test_function_size_zero_variance_floor():
    assert function_sample_size(0.0, 1.0, 0.5, p=0.1, eps_f=0.0016) == 2


def test_function_size_cap(caplog):
    with caplog.at_level(logging.WARNING, logger="shoalsbench.estimators"):
        n = function_sample_size(10.0, 1.0, 0.0, p=0.1, eps_f=1e-9, cap=10 ** 7)
    assert n == 10 ** 7
    assert any("truncated" in record.message for record in caplog.records)


# ---------------------------------------------------------------------------
# Lipschitz bound
# ---------------------------------------------------------------------------

def test_lipschitz_toy_fixtures(toy1q, toy2q):
    assert lipschitz_bound(toy1q) == 1.0
    assert lipschitz_bound(toy2q) == 1.0  # max(1, 0.75)


def test_lipschitz_sum_of_magnitudes(toy1q):
    import dataclasses

    h = parse_hamiltonian("qubits: 1\n2.0 Z\n-1.5 X\n")
    problem = dataclasses.replace(toy1q, hamiltonian=h, name="big")
    assert lipschitz_bound(problem) == 3.5


def test_lipschitz_ignores_identity_terms(toy1q):
    import dataclasses

    h = parse_hamiltonian("qubits: 1\n-10.0 I\n0.5 Z\n")
    problem = dataclasses.replace(toy1q, hamiltonian=h, name="offset")
    assert lipschitz_bound(problem) == 1.0


# ---------------------------------------------------------------------------
# Statistical contract of the sizing rules
# ---------------------------------------------------------------------------

def test_chebyshev_rule_meets_condition_on_true_variances(toy2q, rng):
    """Light version of the Condition-1 check (200 reps; the acceptance suite
    runs the full 1000)."""
    theta = np.array([0.3, -0.7])
    alpha = 1.0
    lipschitz = lipschitz_bound(toy2q)
    exact = exact_gradient(toy2q, theta)
    true_vars = _true_partial_variances(toy2q, theta)
    sizes = gradient_sample_sizes(true_vars, alpha, np.abs(exact), lipschitz,
                                  p=0.1, eps_g=0.04)
    hits = 0
    reps = 200
    for _ in range(reps):
        grad, _ = estimate_grad(toy2q, theta, sizes, rng)
        threshold = max(0.04, lipschitz * alpha * float(np.linalg.norm(grad)))
        hits += np.max(np.abs(grad - exact)) <= threshold
    assert hits >= reps * (0.9 - 3 * math.sqrt(0.09 / reps))


def _true_partial_variances(problem, theta):
    """Analytic single-shot variance of each partial-derivative estimator:
    (Var[f(theta+)] + Var[f(theta-)]) / 4 from the per-term outcome laws."""
    variances = np.empty(problem.param_count)
    for i in range(problem.param_count):
        shifted = np.array(theta, dtype=float)
        shifted[i] = theta[i] + 0.5 * math.pi
        plus = shot_distribution(problem, shifted).exact_variance
        shifted[i] = theta[i] - 0.5 * math.pi
        minus = shot_distribution(problem, shifted).exact_variance
        variances[i] = 0.25 * (plus + minus)
    return variances
