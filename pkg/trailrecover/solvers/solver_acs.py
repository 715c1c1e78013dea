"""
Ant Colony System Solver

Ant colony system for the layered open-path ATSP. Ants start on a
random visit token and grow their tour forward to the target and
backward to the source, under layer precedence.
"""

from __future__ import annotations
import time
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigError
from .solver_base import (
    LayeredGraph,
    RecoveryResult,
    Solver,
    SolverInstance,
    is_better,
)

EPSILON = 1e-12


@dataclass(frozen=True)
class AcsParams:
    """Ant colony system hyperparameters.

    ``alpha`` is the global evaporation rate, ``rho`` the local one.
    """

    tau0: float = 0.5
    beta: float = 2.0
    q0: float = 0.9
    alpha: float = 0.1
    rho: float = 0.1
    ants: int = 10
    iterations: int = 300
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.q0 <= 1.0:
            raise ConfigError(f"q0 must be in [0, 1], got {self.q0}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 < self.rho < 1.0:
            raise ConfigError(f"rho must be in (0, 1), got {self.rho}")
        if self.tau0 <= 0:
            raise ConfigError(f"tau0 must be > 0, got {self.tau0}")
        if self.ants < 1:
            raise ConfigError(f"ants must be >= 1, got {self.ants}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")


class _Colony:
    """Pheromone state and tour construction for one instance."""

    def __init__(self, g: LayeredGraph, params: AcsParams, rng: np.random.Generator):
        self.g = g
        self.params = params
        self.rng = rng
        self.tau = np.full((g.n_nodes, g.n_nodes), params.tau0)
        with np.errstate(divide="ignore", over="ignore"):
            eta = 1.0 / (g.distance + EPSILON)
        self.eta_beta = np.power(eta, params.beta)

    def _choose(self, weights: np.ndarray, candidates: List[int]) -> int:
        """ACS state-transition rule over ``candidates``."""
        g = self.g
        if len(candidates) == 1:
            return candidates[0]
        if self.rng.random() <= self.params.q0:
            top = weights.max()
            ties = [c for c, w in zip(candidates, weights) if w == top]
            return min(ties, key=lambda c: (int(g.loc[c]), c))
        total = weights.sum()
        if not np.isfinite(total) or total <= 0:
            return candidates[int(self.rng.integers(len(candidates)))]
        return candidates[int(self.rng.choice(len(candidates), p=weights / total))]

    def _local_update(self, a: int, b: int):
        p = self.params
        self.tau[a, b] = (1.0 - p.rho) * self.tau[a, b] + p.rho * p.tau0

    def construct(self) -> List[int]:
        """Build one ant's tour as a node path from source to target."""
        g = self.g
        visited = np.zeros(g.n_nodes, dtype=bool)
        start = int(self.rng.integers(1, g.n_tokens + 1))
        start_layer = int(g.layer[start])
        visited[start] = True

        forward = [start]
        node = start
        while node != g.target:
            cand = g.forward_candidates(node, visited, start_layer)
            weights = self.tau[node, cand] * self.eta_beta[node, cand]
            nxt = self._choose(weights, cand)
            self._local_update(node, nxt)
            visited[nxt] = True
            forward.append(nxt)
            node = nxt

        backward: List[int] = []
        node = start
        while node != g.source:
            cand = g.backward_candidates(node, visited)
            weights = self.tau[cand, node] * self.eta_beta[cand, node]
            prv = self._choose(weights, cand)
            self._local_update(prv, node)
            visited[prv] = True
            backward.append(prv)
            node = prv

        return backward[::-1] + forward

    def global_update(self, tour: Sequence[int], log_prob: float):
        """Reinforce the best-so-far tour with quality 1/(length + eps)."""
        p = self.params
        length = -log_prob
        quality = 0.0 if np.isinf(length) else 1.0 / (length + EPSILON)
        for a, b in zip(tour, tour[1:]):
            self.tau[a, b] = (1.0 - p.alpha) * self.tau[a, b] + p.alpha * quality


def solve_acs(instance: SolverInstance, params: Optional[AcsParams] = None) -> RecoveryResult:
    """Best ordering found by ``params.ants`` ants over ``params.iterations``
    iterations. Pheromone starts fresh for every instance.

    Deterministic given ``params.seed``.
    """
    params = params or AcsParams()
    started = time.perf_counter()
    g = LayeredGraph(instance)
    colony = _Colony(g, params, np.random.default_rng(params.seed))

    best_tour: Optional[List[int]] = None
    best_score: Optional[float] = None
    best_key: Optional[Tuple[int, ...]] = None
    tours = 0

    for _ in range(params.iterations):
        for _ in range(params.ants):
            tour = colony.construct()
            tours += 1
            score = g.score(tour)
            key = g.loc_key(tour)
            if is_better(score, key, best_score, best_key):
                best_tour, best_score, best_key = tour, score, key
        assert best_tour is not None and best_score is not None
        colony.global_update(best_tour, best_score)

    assert best_tour is not None
    return g.result(best_tour, "acs", started, tours)


class AcsSolver(Solver):
    """Ant colony system strategy."""

    def __init__(self, params: Optional[AcsParams] = None):
        self.params = params or AcsParams()

    @property
    def name(self) -> str:
        return "acs"

    @property
    def stochastic(self) -> bool:
        return True

    def solve(
        self, instance: SolverInstance, seed: Optional[int] = None
    ) -> RecoveryResult:
        params = self.params if seed is None else replace(self.params, seed=seed)
        return solve_acs(instance, params)
