"""Problem loading: Hamiltonian/ansatz files, problem descriptors, bundled fixtures.

A problem descriptor is a small TOML file pairing a Hamiltonian file with an
ansatz file, optionally overriding the per-estimate circuit counts:

    name = "h2"
    hamiltonian = "h2.ham"
    ansatz = "h2.ans"
    circuits_per_g = 40      # optional override, default 2 * n * t_f

File paths are resolved relative to the descriptor.  Three fixtures ship with
the package: two analytically tractable toys and a hydrogen-style two-qubit
instance with published-table circuit counts.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path
from typing import Dict

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .pauli import parse_hamiltonian
from .sim import Problem, parse_ansatz

BUILTIN_NAMES = ("toy-1q", "toy-2q", "h2")


def load_hamiltonian(path: Path):
    return parse_hamiltonian(Path(path).read_text(encoding="utf-8"))


def load_ansatz(path: Path):
    return parse_ansatz(Path(path).read_text(encoding="utf-8"))


def load_problem(path: Path) -> Problem:
    """Load a problem descriptor TOML from disk."""
    path = Path(path)
    with open(path, "rb") as handle:
        data = tomllib.load(handle)
    return _problem_from_mapping(data, path.parent, default_name=path.stem)


def _problem_from_mapping(data: dict, base: Path, default_name: str) -> Problem:
    for key in ("hamiltonian", "ansatz"):
        if key not in data:
            raise ValueError(f"problem descriptor missing {key!r}")
    hamiltonian = load_hamiltonian(base / data["hamiltonian"])
    ansatz = load_ansatz(base / data["ansatz"])
    return Problem(
        name=str(data.get("name", default_name)),
        hamiltonian=hamiltonian,
        ansatz=ansatz,
        circuits_per_f=int(data.get("circuits_per_f", 0)),
        circuits_per_g=int(data.get("circuits_per_g", 0)),
    )


def builtin_problem(name: str) -> Problem:
    """Load one of the bundled fixtures by name."""
    if name not in BUILTIN_NAMES:
        raise ValueError(f"unknown builtin problem {name!r}; have {BUILTIN_NAMES}")
    fixtures = resources.files("shoalsbench") / "fixtures"
    with resources.as_file(fixtures / f"{name}.toml") as path:
        return load_problem(path)


def builtin_problems() -> Dict[str, Problem]:
    return {name: builtin_problem(name) for name in BUILTIN_NAMES}


def resolve_problem(ref: str) -> Problem:
    """Builtin name, or a path to a problem descriptor TOML."""
    if ref in BUILTIN_NAMES:
        return builtin_problem(ref)
    path = Path(ref)
    if path.exists():
        return load_problem(path)
    raise ValueError(f"problem {ref!r} is neither a builtin name nor an existing file")
