"""Reaction-diffusion equations with spatially distributed relay hysteresis."""

__version__ = "0.1.0"

from .errors import HysteresisError
from .field import Grid, init_field, step_config
from .pde import SolverParams, Trajectory, solve
from .relay import BranchPair, cubic_branch_pair
from .transverse import FreeBoundaryMonitor

__all__ = [
    "__version__", "HysteresisError", "Grid", "init_field", "step_config", "SolverParams",
    "Trajectory", "solve", "BranchPair", "cubic_branch_pair", "FreeBoundaryMonitor",
]
