"""Pauli-string algebra, Hamiltonian text I/O, and dense-matrix ground-energy oracles.

A Hamiltonian is a weighted sum of Pauli strings,

    H = sum_j a_j P_j,

with real coefficients a_j and each P_j a tensor product over {I, X, Y, Z}.
Everything here is immutable after construction and safe to share across
threads.  Dense matrices are only built for small systems (<= 12 qubits);
they serve as exact oracles, never as the simulation path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

PAULI_LETTERS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

# 2^12 = 4096: dense oracles stay comfortably in memory below this.
MAX_DENSE_QUBITS = 12


class ParseError(ValueError):
    """Malformed Hamiltonian/ansatz text.  Carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, one letter per qubit.

    Qubit 0 is the leftmost letter and the most significant bit of a basis
    index, matching the Kronecker-product order of :func:`dense_matrix`.
    """

    letters: str

    def __post_init__(self):
        if not self.letters:
            raise ValueError("empty Pauli string")
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    def __str__(self) -> str:
        return self.letters

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def qubit_count(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    def bit_masks(self) -> Tuple[int, int, int]:
        """Index-arithmetic form of the string: (flip_mask, phase_mask, y_count).

        Acting on a basis state |b>, the string maps it to
        ``i**y_count * (-1)**popcount(b & phase_mask) * |b ^ flip_mask>``:
        X and Y flip the qubit's bit, Y and Z contribute a (-1)**bit sign,
        and each Y carries a global factor i.
        """
        n = len(self.letters)
        flip = 0
        phase = 0
        y_count = 0
        for q, letter in enumerate(self.letters):
            bit = 1 << (n - 1 - q)
            if letter in "XY":
                flip |= bit
            if letter in "YZ":
                phase |= bit
            if letter == "Y":
                y_count += 1
        return flip, phase, y_count


@dataclass(frozen=True)
class Hamiltonian:
    """Ordered list of (coefficient, PauliString) terms on a fixed qubit count.

    Term order and duplicates are preserved exactly as declared: the term
    count drives circuit counts, so no algebraic simplification happens here.
    """

    terms: Tuple[Tuple[float, PauliString], ...]
    qubit_count: int

    def __post_init__(self):
        if self.qubit_count <= 0:
            raise ValueError("qubit_count must be positive")
        if not self.terms:
            raise ValueError("Hamiltonian needs at least one term")
        for coeff, pauli in self.terms:
            if not math.isfinite(coeff):
                raise ValueError(f"non-finite coefficient {coeff!r}")
            if pauli.qubit_count != self.qubit_count:
                raise ValueError(
                    f"term {pauli} has {pauli.qubit_count} qubits, expected {self.qubit_count}"
                )

    def __iter__(self) -> Iterator[Tuple[float, PauliString]]:
        return iter(self.terms)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def sampled_terms(self) -> Tuple[Tuple[float, PauliString], ...]:
        """Terms that require measurement (non-identity strings)."""
        return tuple((a, p) for a, p in self.terms if not p.is_identity)

    @property
    def constant_offset(self) -> float:
        """Sum of identity-term coefficients; contributed exactly, never sampled."""
        return float(sum(a for a, p in self.terms if p.is_identity))

    @property
    def shot_bound(self) -> float:
        """Deterministic bound 2*sum_j |a_j| on any single-shot estimation error."""
        return 2.0 * float(sum(abs(a) for a, _ in self.terms))

    @property
    def variance_bound(self) -> float:
        """Upper bound sum_j a_j^2 (sampled terms) on the single-shot variance.

        Identity terms are excluded: constants are added exactly and carry no
        sampling variance.
        """
        return float(sum(a * a for a, p in self.terms if not p.is_identity))


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse the plain-text Hamiltonian format.

    Format: a ``qubits: <int>`` header followed by one ``<coefficient>
    <letters>`` term per line.  ``#`` starts a comment; blank lines are
    ignored.  Raises :class:`ParseError` with a line number on bad letters,
    wrong string lengths, or non-finite coefficients.
    """
    qubit_count = None
    terms = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("qubits:"):
            if qubit_count is not None:
                raise ParseError("duplicate qubits header", line_no)
            value = line.split(":", 1)[1].strip()
            try:
                qubit_count = int(value)
            except ValueError:
                raise ParseError(f"bad qubit count {value!r}", line_no) from None
            if qubit_count <= 0:
                raise ParseError(f"qubit count must be positive, got {qubit_count}", line_no)
            continue
        if qubit_count is None:
            raise ParseError("term before 'qubits:' header", line_no)
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"expected '<coefficient> <letters>', got {line!r}", line_no)
        try:
            coeff = float(fields[0])
        except ValueError:
            raise ParseError(f"bad coefficient {fields[0]!r}", line_no) from None
        if not math.isfinite(coeff):
            raise ParseError(f"non-finite coefficient {fields[0]!r}", line_no)
        try:
            pauli = PauliString(fields[1].upper())
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from None
        if pauli.qubit_count != qubit_count:
            raise ParseError(
                f"term {pauli} has {pauli.qubit_count} letters, expected {qubit_count}", line_no
            )
        terms.append((coeff, pauli))
    if qubit_count is None:
        raise ParseError("missing 'qubits:' header")
    if not terms:
        raise ParseError("no terms found")
    return Hamiltonian(terms=tuple(terms), qubit_count=qubit_count)


def dump_hamiltonian(h: Hamiltonian) -> str:
    """Serialize to the text format.  repr() keeps full float precision, so
    parse -> dump -> parse is coefficient-exact (stronger than the required
    15 significant digits)."""
    lines = [f"qubits: {h.qubit_count}"]
    lines.extend(f"{coeff!r} {pauli}" for coeff, pauli in h.terms)
    return "\n".join(lines) + "\n"


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of one Pauli string (Kronecker product, qubit 0 leftmost)."""
    m = PAULI_MATRICES[p.letters[0]]
    for letter in p.letters[1:]:
        m = np.kron(m, PAULI_MATRICES[letter])
    return m


def dense_matrix(h: Hamiltonian) -> np.ndarray:
    """Hermitian 2^n x 2^n matrix sum_j a_j kron(P_j).  Oracle use only."""
    if h.qubit_count > MAX_DENSE_QUBITS:
        raise ValueError(
            f"dense matrix limited to {MAX_DENSE_QUBITS} qubits, got {h.qubit_count}"
        )
    dim = 2 ** h.qubit_count
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, pauli in h.terms:
        out += coeff * pauli_matrix(pauli)
    return out


def exact_ground_energy(h: Hamiltonian) -> float:
    """Minimum eigenvalue of the dense matrix (the target value f_*).

    Computed with a dense Hermitian eigensolve; exact at this scale.  Never
    charged to any cost ledger: it exists so trajectories can be measured
    against the known optimum.
    """
    return float(np.linalg.eigvalsh(dense_matrix(h))[0])
