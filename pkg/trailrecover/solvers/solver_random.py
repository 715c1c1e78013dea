"""
Random Solver

Lower-bound baseline: a uniformly random permutation of every layer.
"""

from __future__ import annotations
import time
from typing import List, Optional

import numpy as np

from .solver_base import LayeredGraph, RecoveryResult, Solver, SolverInstance


def solve_random(instance: SolverInstance, seed: Optional[int] = None) -> RecoveryResult:
    """Shuffle each layer independently; the ordering is scored but never
    optimised."""
    started = time.perf_counter()
    g = LayeredGraph(instance)
    rng = np.random.default_rng(seed)

    path: List[int] = [g.source]
    for nodes in g.layer_nodes:
        path.extend(int(nodes[i]) for i in rng.permutation(len(nodes)))
    path.append(g.target)

    return g.result(path, "random", started, 1)


class RandomSolver(Solver):
    """Random guessing strategy."""

    @property
    def name(self) -> str:
        return "random"

    @property
    def stochastic(self) -> bool:
        return True

    def solve(
        self, instance: SolverInstance, seed: Optional[int] = None
    ) -> RecoveryResult:
        return solve_random(instance, seed)
