"""
Solver Registry

Maps strategy tags to configured solver instances.
"""

from __future__ import annotations
from typing import Dict, Iterable, List, Optional

from ..errors import ConfigError
from .solver_acs import AcsParams, AcsSolver
from .solver_base import Solver
from .solver_exact import DEFAULT_EXACT_BUDGET, ExactSolver
from .solver_greedy import GreedySolver
from .solver_random import RandomSolver

STRATEGIES = ("exact", "acs", "greedy", "random")


class SolverRegistry:
    """
    Holds one solver per strategy tag.

    Solvers are looked up by their ``name``; registering a second solver
    under the same tag replaces the first.
    """

    def __init__(self, solvers: Optional[Iterable[Solver]] = None):
        self._solvers: Dict[str, Solver] = {}
        for solver in solvers or ():
            self.register(solver)

    @classmethod
    def default(
        cls,
        acs: Optional[AcsParams] = None,
        exact_budget: int = DEFAULT_EXACT_BUDGET,
        exact_fallback: bool = False,
    ) -> "SolverRegistry":
        """All four built-in strategies.

        With ``exact_fallback`` the exact solver hands over-budget runs to
        the ACS solver of the same registry.
        """
        acs_solver = AcsSolver(acs)
        return cls(
            [
                ExactSolver(exact_budget, acs_solver if exact_fallback else None),
                acs_solver,
                GreedySolver(),
                RandomSolver(),
            ]
        )

    def register(self, solver: Solver):
        self._solvers[solver.name] = solver

    def get(self, name: str) -> Solver:
        try:
            return self._solvers[name]
        except KeyError:
            raise ConfigError(
                f"Unknown strategy {name!r}, expected one of {', '.join(self.names)}"
            ) from None

    @property
    def names(self) -> List[str]:
        return list(self._solvers)

    def __contains__(self, name: object) -> bool:
        return name in self._solvers

    def __len__(self) -> int:
        return len(self._solvers)


def build_solver(
    name: str,
    acs: Optional[AcsParams] = None,
    exact_budget: int = DEFAULT_EXACT_BUDGET,
    exact_fallback: bool = False,
) -> Solver:
    """Construct a single built-in solver by tag."""
    return SolverRegistry.default(acs, exact_budget, exact_fallback).get(name)
