"""Fifth-order WENO Euler solver with a conservative positivity-preserving sweeping limiter."""

from .grid import BoundaryCondition, Field, WallMask, apply_boundary
from .problems import PROBLEM_NAMES, ProblemSpec, build_field, make_problem
from .runner import RunSummary, convergence_study, run_problem
from .state import (DEFAULT_EPS, PressureFunctional, StateDomainError, is_admissible,
                    mean_state, pressure)
from .sweep import (InfeasibleError, NonTerminationError, SweepStats, apply_limiter,
                    density_sweep, node_adjust, pressure_sweep, snake_order)
from .timestep import PositivityError, RunConfig, SolverError, march
from .weno import compute_residual, roe_eigensystem, weno5_reconstruct

__all__ = [
    "BoundaryCondition", "Field", "WallMask", "apply_boundary",
    "PROBLEM_NAMES", "ProblemSpec", "build_field", "make_problem",
    "RunSummary", "convergence_study", "run_problem",
    "DEFAULT_EPS", "PressureFunctional", "StateDomainError", "is_admissible",
    "mean_state", "pressure",
    "InfeasibleError", "NonTerminationError", "SweepStats", "apply_limiter",
    "density_sweep", "node_adjust", "pressure_sweep", "snake_order",
    "PositivityError", "RunConfig", "SolverError", "march",
    "compute_residual", "roe_eigensystem", "weno5_reconstruct",
]
