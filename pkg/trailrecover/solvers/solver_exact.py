"""
Exact Solver

Enumerates every within-layer ordering, O((N!)^T), with a bound on
partial scores to skip hopeless prefixes.
"""

from __future__ import annotations
import math
import time
from collections import Counter
from typing import List, Optional

import numpy as np
from pubsub import pub

from .. import topics
from ..errors import BudgetExceeded, ConfigError
from .solver_base import LayeredGraph, RecoveryResult, Solver, SolverInstance

DEFAULT_EXACT_BUDGET = 10**7


def solve_exact(
    instance: SolverInstance, budget: int = DEFAULT_EXACT_BUDGET
) -> RecoveryResult:
    """Globally optimal ordering for one broken run.

    Ties go to the lexicographically smallest interned-index sequence.
    All log-probabilities are <= 0, so a prefix scoring no better than
    the best complete ordering cannot win and is cut.

    Raises:
        BudgetExceeded: if the product of layer-size factorials exceeds
            ``budget``.
    """
    required = instance.enumerations
    if required > budget:
        raise BudgetExceeded(required, budget)

    started = time.perf_counter()
    g = LayeredGraph(instance)
    log_probs = np.asarray(instance.net.log_probs)
    source_loc = int(g.loc[g.source])
    target_loc = int(g.loc[g.target])
    n_loc = log_probs.shape[0]
    # Open boundaries score log 1 on the edge into or out of the run.
    first_step = np.zeros(n_loc) if instance.open_source else log_probs[source_loc]
    last_step = np.zeros(n_loc) if instance.open_target else log_probs[:, target_loc]

    # Layer multisets over interned indices; duplicates are one choice.
    layer_counts: List[Counter] = [
        Counter(int(g.loc[n]) for n in nodes) for nodes in g.layer_nodes
    ]
    sizes = list(instance.layer_sizes) + [0]
    path: List[int] = [source_loc]
    best_score: Optional[float] = None
    best_path: Optional[List[int]] = None
    evaluated = 0

    def extend(k: int, remaining: int, partial: float):
        nonlocal best_score, best_path, evaluated
        if best_score is not None and partial <= best_score:
            return
        if k == len(layer_counts):
            total = partial + float(last_step[path[-1]])
            evaluated += 1
            if best_score is None or total > best_score:
                best_score = total
                best_path = path + [target_loc]
            return
        if remaining == 0:
            extend(k + 1, sizes[k + 1], partial)
            return
        counts = layer_counts[k]
        for loc in sorted(counts):
            if counts[loc] == 0:
                continue
            row = first_step if len(path) == 1 else log_probs[path[-1]]
            step = partial + float(row[loc])
            counts[loc] -= 1
            path.append(loc)
            extend(k, remaining - 1, step)
            path.pop()
            counts[loc] += 1

    extend(0, sizes[0], 0.0)

    assert best_path is not None and best_score is not None
    index = instance.net.index
    return RecoveryResult(
        ordering=tuple(index.token(i) for i in best_path),
        log_prob=best_score,
        solver="exact",
        layer_sizes=instance.layer_sizes,
        elapsed=time.perf_counter() - started,
        evaluated=evaluated,
        infeasible=best_score == -math.inf,
    )


class ExactSolver(Solver):
    """
    Brute-force strategy with an enumeration budget.

    When ``fallback`` is set, instances over budget are handed to it
    instead of failing.
    """

    def __init__(
        self, budget: int = DEFAULT_EXACT_BUDGET, fallback: Optional[Solver] = None
    ):
        if budget < 1:
            raise ConfigError(f"Exact budget must be >= 1, got {budget}")
        self.budget = budget
        self.fallback = fallback

    @property
    def name(self) -> str:
        return "exact"

    def solve(
        self, instance: SolverInstance, seed: Optional[int] = None
    ) -> RecoveryResult:
        try:
            return solve_exact(instance, self.budget)
        except BudgetExceeded as e:
            if self.fallback is None:
                raise
            pub.sendMessage(
                topics.SOLVER_BUDGET_FALLBACK,
                required=e.required,
                budget=e.budget,
                fallback=self.fallback.name,
            )
            return self.fallback.solve(instance, seed=seed)
