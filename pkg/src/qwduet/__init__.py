"""Two coined quantum walkers on separate lines with fractionally swapped coins."""

from .gates import joint_coin_matrix, swap_tau_matrix
from .kernels import DEFAULT_BACKEND, available_backends
from .lattice import (
    LatticeStateVector,
    StepBudgetExceeded,
    StepParameters,
    apply_step,
    evolve,
    initial_state,
    state_norm,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BACKEND",
    "LatticeStateVector",
    "StepBudgetExceeded",
    "StepParameters",
    "__version__",
    "apply_step",
    "available_backends",
    "evolve",
    "initial_state",
    "joint_coin_matrix",
    "state_norm",
    "swap_tau_matrix",
]
