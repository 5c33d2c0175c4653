import numpy as np
import pytest

from shoalsbench.problems import builtin_problem


@pytest.fixture
def rng():
    """Deterministic generator for reproducible tests."""
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def toy1q():
    return builtin_problem("toy-1q")


@pytest.fixture(scope="session")
def toy2q():
    return builtin_problem("toy-2q")


@pytest.fixture(scope="session")
def h2():
    return builtin_problem("h2")
