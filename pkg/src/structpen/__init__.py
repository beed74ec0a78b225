"""Structured sparsity penalties ``Omega(beta | Lambda)`` and a solver for
penalized least squares built on them."""
from .core import (ConvergenceError, DomainError, GroupPartition, PenaltyResult, gamma,
                   group_average_map, l1_norm, l2_norm, phi_eps)
from .penalties import *  # noqa: F401,F403
from .penalties import __all__ as _penalty_names
from .solver import (Problem, SolveResult, SolverConfig, SolverTrace, alternating_solve,
                     dual_objective, joint_objective, objective, orthogonal_solve,
                     tikhonov_step)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DomainError", "GroupPartition", "PenaltyResult", "gamma",
    "group_average_map", "l1_norm", "l2_norm", "phi_eps",
    "Problem", "SolveResult", "SolverConfig", "SolverTrace", "alternating_solve",
    "dual_objective", "joint_objective", "objective", "orthogonal_solve", "tikhonov_step",
] + list(_penalty_names)
