"""
Solver System

Phase 3 strategies that recover the visiting order inside broken runs.
"""

from .solver_base import (
    LayeredGraph,
    RecoveryResult,
    Solver,
    SolverInstance,
    make_instance,
    recover_trail,
    recover_trails,
)
from .solver_exact import DEFAULT_EXACT_BUDGET, ExactSolver, solve_exact
from .solver_acs import AcsParams, AcsSolver, solve_acs
from .solver_greedy import GreedySolver, solve_greedy
from .solver_random import RandomSolver, solve_random
from .solver_registry import STRATEGIES, SolverRegistry, build_solver

__all__ = [
    # Base classes
    "Solver",
    "SolverInstance",
    "RecoveryResult",
    "LayeredGraph",
    "make_instance",
    "recover_trail",
    "recover_trails",
    # Strategies
    "DEFAULT_EXACT_BUDGET",
    "ExactSolver",
    "solve_exact",
    "AcsParams",
    "AcsSolver",
    "solve_acs",
    "GreedySolver",
    "solve_greedy",
    "RandomSolver",
    "solve_random",
    # Registry
    "STRATEGIES",
    "SolverRegistry",
    "build_solver",
]
