"""
Greedy Solver

Nearest-neighbour baseline: always take the most probable next token,
O(T*N^2) per run.
"""

from __future__ import annotations
import time
from typing import List, Optional

import numpy as np

from .solver_base import LayeredGraph, RecoveryResult, Solver, SolverInstance


def solve_greedy(instance: SolverInstance) -> RecoveryResult:
    """Walk from the source, appending the eligible token with the highest
    transition probability from the current one.

    Ties go to the smallest interned index. A dead end (every candidate
    has probability zero) is crossed the same way and shows up as a
    -inf score.
    """
    started = time.perf_counter()
    g = LayeredGraph(instance)
    visited = np.zeros(g.n_nodes, dtype=bool)
    visited[g.source] = True

    path: List[int] = [g.source]
    node = g.source
    while node != g.target:
        candidates = g.forward_candidates(node, visited)
        node = min(candidates, key=lambda c: (-g.log_p[node, c], int(g.loc[c]), c))
        visited[node] = True
        path.append(node)

    return g.result(path, "greedy", started, 1)


class GreedySolver(Solver):
    """Greedy nearest-neighbour strategy."""

    @property
    def name(self) -> str:
        return "greedy"

    def solve(
        self, instance: SolverInstance, seed: Optional[int] = None
    ) -> RecoveryResult:
        return solve_greedy(instance)
