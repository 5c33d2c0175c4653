"""Statevector execution of Pauli-rotation ansatz circuits and shot sampling.

The circuit model is a bit-flip state preparation followed by an ordered list
of rotations exp(-i * theta_k * P / 2), one distinct parameter per gate (the
two-point shift rule for derivatives is exact only in that case, and multi-use
parameters are rejected at load time).

Alongside the exact oracles (objective, gradient via parameter shift) this
module implements the stochastic estimators actually "billed" during
optimization: a single-shot objective estimate observes every non-identity
Hamiltonian term once, and a single-shot partial derivative is half the
difference of two independent single-shot estimates at the +/- pi/2 shifted
points.  :class:`ShotDistribution` exposes the same sampling law in batched
form for the averaged estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .pauli import Hamiltonian, ParseError, PauliString, exact_ground_energy

NORM_TOL = 1e-10


@dataclass(frozen=True)
class AnsatzCircuit:
    """Bit-flip preparation plus parameterized Pauli rotations.

    ``gates`` holds (parameter_index, generator) pairs in application order;
    each parameter index in [0, param_count) must appear exactly once and
    every generator must be a non-identity string on the full register.
    """

    qubit_count: int
    param_count: int
    prep_flips: frozenset
    gates: Tuple[Tuple[int, PauliString], ...]

    def __post_init__(self):
        if self.qubit_count <= 0:
            raise ValueError("qubit_count must be positive")
        if self.param_count <= 0:
            raise ValueError("param_count must be positive")
        for q in self.prep_flips:
            if not 0 <= q < self.qubit_count:
                raise ValueError(f"flip qubit {q} out of range")
        seen = set()
        for idx, gen in self.gates:
            if not 0 <= idx < self.param_count:
                raise ValueError(f"parameter index {idx} out of range")
            if idx in seen:
                raise ValueError(f"parameter {idx} used by more than one gate")
            seen.add(idx)
            if gen.qubit_count != self.qubit_count:
                raise ValueError(f"generator {gen} does not match qubit count")
            if gen.is_identity:
                raise ValueError("identity generator is not a gate")
        if len(seen) != self.param_count:
            missing = sorted(set(range(self.param_count)) - seen)
            raise ValueError(f"parameters {missing} appear in no gate")


def parse_ansatz(text: str) -> AnsatzCircuit:
    """Parse the plain-text ansatz format.

    ``qubits:``/``params:`` headers, then ``flip <qubit>`` lines and
    ``gate <param_index> <letters>`` lines in application order.  ``#``
    comments and blank lines are ignored.
    """
    qubits = None
    params = None
    flips = set()
    gates = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lowered = line.lower()
        if lowered.startswith("qubits:"):
            qubits = _header_int(line, line_no)
            continue
        if lowered.startswith("params:"):
            params = _header_int(line, line_no)
            continue
        fields = line.split()
        if fields[0] == "flip":
            if len(fields) != 2:
                raise ParseError(f"expected 'flip <qubit>', got {line!r}", line_no)
            flips.add(_parse_int(fields[1], line_no))
        elif fields[0] == "gate":
            if len(fields) != 3:
                raise ParseError(f"expected 'gate <param_index> <letters>', got {line!r}", line_no)
            idx = _parse_int(fields[1], line_no)
            try:
                gen = PauliString(fields[2].upper())
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from None
            gates.append((idx, gen))
        else:
            raise ParseError(f"unknown directive {fields[0]!r}", line_no)
    if qubits is None or params is None:
        raise ParseError("missing 'qubits:' or 'params:' header")
    try:
        return AnsatzCircuit(
            qubit_count=qubits,
            param_count=params,
            prep_flips=frozenset(flips),
            gates=tuple(gates),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _header_int(line: str, line_no: int) -> int:
    return _parse_int(line.split(":", 1)[1].strip(), line_no)


def _parse_int(text: str, line_no: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"bad integer {text!r}", line_no) from None


# ---------------------------------------------------------------------------
# State preparation and Pauli action
# ---------------------------------------------------------------------------

def apply_pauli(state: np.ndarray, pauli: PauliString) -> np.ndarray:
    """Return P|psi> using bit-mask index arithmetic (no matrix is built)."""
    flip, phase_mask, y_count = pauli.bit_masks()
    idx = np.arange(state.size, dtype=np.int64)
    src = idx ^ flip
    masked = src & phase_mask
    # parity of popcount via bit folding
    for shift in (32, 16, 8, 4, 2, 1):
        masked ^= masked >> shift
    signs = 1.0 - 2.0 * (masked & 1)
    out = (1j ** (y_count % 4)) * signs * state[src]
    return out


def prepare_state(circuit: AnsatzCircuit, theta: np.ndarray) -> np.ndarray:
    """Run the circuit on |0...0>: flips first, then each rotation in order.

    Each gate applies exp(-i*t*P/2) = cos(t/2) I - i sin(t/2) P in a single
    Pauli-action pass over the amplitudes.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.param_count,):
        raise ValueError(
            f"theta has shape {theta.shape}, expected ({circuit.param_count},)"
        )
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta contains non-finite entries")
    n = circuit.qubit_count
    start = 0
    for q in circuit.prep_flips:
        start |= 1 << (n - 1 - q)
    state = np.zeros(2 ** n, dtype=complex)
    state[start] = 1.0
    for idx, gen in circuit.gates:
        half = 0.5 * theta[idx]
        state = math.cos(half) * state - 1j * math.sin(half) * apply_pauli(state, gen)
    return state


def expectation(state: np.ndarray, pauli: PauliString) -> float:
    """Exact <psi|P|psi>, guaranteed real up to representation error."""
    if state.size != 2 ** pauli.qubit_count:
        raise ValueError(
            f"state dimension {state.size} does not match {pauli.qubit_count} qubits"
        )
    value = np.vdot(state, apply_pauli(state, pauli))
    if abs(value.imag) >= NORM_TOL:
        raise ValueError(f"expectation of {pauli} has imaginary part {value.imag:g}")
    return float(value.real)


# ---------------------------------------------------------------------------
# Problem: Hamiltonian + ansatz + circuit-count statistics
# ---------------------------------------------------------------------------

@dataclass
class Problem:
    """A benchmark instance: observable, circuit, and per-estimate circuit counts.

    ``circuits_per_f`` (t_f) defaults to the number of non-identity
    Hamiltonian terms: one circuit per measured term.  ``circuits_per_g``
    (t_g) defaults to 2 * n * t_f, two shifted evaluations per coordinate.
    Table-style overrides are allowed for cost studies where the published
    circuit counts differ from the simulated default.  Treat instances as
    immutable after construction.
    """

    name: str
    hamiltonian: Hamiltonian
    ansatz: AnsatzCircuit
    circuits_per_f: int = 0
    circuits_per_g: int = 0
    _ground_energy: float = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.hamiltonian.qubit_count != self.ansatz.qubit_count:
            raise ValueError("hamiltonian and ansatz qubit counts differ")
        sampled = len(self.hamiltonian.sampled_terms)
        if sampled == 0:
            raise ValueError("problem needs at least one non-identity term")
        if self.circuits_per_f <= 0:
            self.circuits_per_f = sampled
        if self.circuits_per_g <= 0:
            self.circuits_per_g = 2 * self.ansatz.param_count * self.circuits_per_f

    @property
    def param_count(self) -> int:
        return self.ansatz.param_count

    @property
    def qubit_count(self) -> int:
        return self.ansatz.qubit_count

    def ground_energy(self) -> float:
        """Exact lowest eigenvalue (cached dense eigensolve; never billed)."""
        if self._ground_energy is None:
            self._ground_energy = exact_ground_energy(self.hamiltonian)
        return self._ground_energy


def exact_objective(problem: Problem, theta: np.ndarray) -> float:
    """Infinite-shot objective sum_j a_j <P_j>.  Monitoring oracle, never billed."""
    state = prepare_state(problem.ansatz, np.asarray(theta, dtype=float))
    total = problem.hamiltonian.constant_offset
    for coeff, pauli in problem.hamiltonian.sampled_terms:
        total += coeff * expectation(state, pauli)
    return total


def exact_gradient(problem: Problem, theta: np.ndarray) -> np.ndarray:
    """Exact gradient from the two-point shift rule.

    Component i is (f(theta + pi/2 e_i) - f(theta - pi/2 e_i)) / 2, which is
    exact (not a finite-difference approximation) because every parameter
    enters through a single Pauli rotation.  Never billed.
    """
    theta = np.asarray(theta, dtype=float)
    grad = np.empty(problem.param_count)
    for i in range(problem.param_count):
        shifted = theta.copy()
        shifted[i] = theta[i] + 0.5 * math.pi
        plus = exact_objective(problem, shifted)
        shifted[i] = theta[i] - 0.5 * math.pi
        minus = exact_objective(problem, shifted)
        grad[i] = 0.5 * (plus - minus)
    return grad


# ---------------------------------------------------------------------------
# Shot sampling
# ---------------------------------------------------------------------------

def sample_pauli(state: np.ndarray, pauli: PauliString, rng: np.random.Generator) -> int:
    """One +/-1 measurement of a non-identity Pauli string.

    Returns +1 with probability (1 + <P>)/2 and consumes exactly one uniform
    draw from ``rng``.  The probability is clamped against rounding.
    """
    if pauli.is_identity:
        raise ValueError("identity terms are constants, not measurements")
    p_plus = min(1.0, max(0.0, 0.5 * (1.0 + expectation(state, pauli))))
    return 1 if rng.random() < p_plus else -1


@dataclass(frozen=True)
class ShotDistribution:
    """Sampling law of the single-shot objective estimator at a fixed point.

    Built once per evaluation point, so batched estimators avoid re-running
    the circuit per draw.  Each draw observes every sampled term once
    (term-major uniform consumption: all draws for term 0, then term 1, ...).
    """

    constant: float
    coeffs: np.ndarray
    p_plus: np.ndarray

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """``count`` independent single-shot values."""
        if count <= 0:
            raise ValueError("count must be positive")
        total = np.full(count, self.constant)
        for coeff, p in zip(self.coeffs, self.p_plus):
            outcomes = np.where(rng.random(count) < p, 1.0, -1.0)
            total += coeff * outcomes
        return total

    @property
    def exact_value(self) -> float:
        return float(self.constant + self.coeffs @ (2.0 * self.p_plus - 1.0))

    @property
    def exact_variance(self) -> float:
        """Var[f(theta; xi)] = sum_j a_j^2 (1 - <P_j>^2); terms are independent."""
        expectations = 2.0 * self.p_plus - 1.0
        return float(np.sum(self.coeffs ** 2 * (1.0 - expectations ** 2)))


def shot_distribution(problem: Problem, theta: np.ndarray) -> ShotDistribution:
    """Prepare the state at ``theta`` and freeze the per-term outcome law."""
    state = prepare_state(problem.ansatz, np.asarray(theta, dtype=float))
    sampled = problem.hamiltonian.sampled_terms
    coeffs = np.array([a for a, _ in sampled])
    p_plus = np.empty(len(sampled))
    for j, (_, pauli) in enumerate(sampled):
        p_plus[j] = min(1.0, max(0.0, 0.5 * (1.0 + expectation(state, pauli))))
    return ShotDistribution(
        constant=problem.hamiltonian.constant_offset, coeffs=coeffs, p_plus=p_plus
    )


def single_shot_f(problem, theta, rng, ledger=None) -> float:
    """One unbiased single-shot estimate of the objective.

    Observes each non-identity term once (one shot per circuit, t_f shots
    total); identity terms contribute their coefficient exactly at zero cost.
    When a ledger is given only the shot counter is advanced; switch and
    communication charges belong to the batch that requested the draws.
    """
    state = prepare_state(problem.ansatz, np.asarray(theta, dtype=float))
    total = problem.hamiltonian.constant_offset
    for coeff, pauli in problem.hamiltonian.sampled_terms:
        total += coeff * sample_pauli(state, pauli, rng)
    if ledger is not None:
        ledger.add_shots(problem.circuits_per_f)
    return total


def single_shot_partial(problem, theta, i: int, rng, ledger=None) -> float:
    """One unbiased single-shot estimate of the i-th partial derivative.

    Half the difference of independent single-shot objective estimates at the
    +/- pi/2 shifted points; costs 2 * t_f shots.
    """
    theta = np.asarray(theta, dtype=float)
    if not 0 <= i < problem.param_count:
        raise ValueError(f"coordinate {i} out of range")
    shifted = theta.copy()
    shifted[i] = theta[i] + 0.5 * math.pi
    plus = single_shot_f(problem, shifted, rng, ledger)
    shifted[i] = theta[i] - 0.5 * math.pi
    minus = single_shot_f(problem, shifted, rng, ledger)
    return 0.5 * (plus - minus)
