"""Shot-noise VQE optimizer workbench.

Simulates variational-eigensolver objectives under measurement shot noise,
runs a shot-adaptive line search against stochastic-gradient baselines, and
accounts every shot, circuit switch, and device communication so wall-clock
trade-offs between the two solver families can be priced and explored.
"""

from .estimators import (
    CostLedger,
    CostSnapshot,
    DeviceModel,
    EstimateWithStats,
    SUPERCONDUCTING,
    estimate_f,
    estimate_grad,
    function_sample_size,
    gradient_sample_sizes,
    lipschitz_bound,
)
from .optimizers import (
    Budget,
    ShoalsConfig,
    Trajectory,
    adam_run,
    icans_run,
    sgd_run,
    shoals_run,
)
from .pauli import Hamiltonian, PauliString, dense_matrix, exact_ground_energy, parse_hamiltonian
from .problems import builtin_problem, builtin_problems, load_problem, resolve_problem
from .sim import (
    AnsatzCircuit,
    Problem,
    exact_gradient,
    exact_objective,
    parse_ansatz,
    prepare_state,
    single_shot_f,
    single_shot_partial,
)

__version__ = "0.1.0"
