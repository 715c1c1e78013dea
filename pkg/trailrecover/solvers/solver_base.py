"""
Solver Base Classes

Provides the SolverInstance/RecoveryResult types, the Solver interface,
the layered graph every strategy searches, and the per-trail recovery
driver.
"""

from __future__ import annotations
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pubsub import pub

from .. import topics
from ..errors import InvalidInputError, TrailRecoverError
from ..seeding import derive_seed
from ..trail_model import BrokenRun, Trail, detect_broken_points
from ..transition import TransitionNetwork, score_indices


@dataclass(frozen=True)
class SolverInstance:
    """One broken run to order: visit every layer's tokens, layer by layer,
    between ``source`` and ``target``.

    An open boundary (``open_source``/``open_target``) is a trail edge with
    no record beyond it. Its sentinel stays in the ordering as a placeholder
    but the edge to it counts as log 1.
    """

    net: TransitionNetwork
    layers: Tuple[Tuple[str, ...], ...]
    source: str
    target: str
    run: Optional[BrokenRun] = None
    open_source: bool = False
    open_target: bool = False

    def __post_init__(self):
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers or any(not layer for layer in layers):
            raise InvalidInputError("A solver instance needs non-empty layers")
        # Fail early on locations the network has never seen.
        for token in (self.source, self.target, *self.tokens):
            self.net.index.index(token)

    @property
    def tokens(self) -> List[str]:
        return [t for layer in self.layers for t in layer]

    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        return tuple(len(layer) for layer in self.layers)

    @property
    def n_max(self) -> int:
        """N: size of the largest layer."""
        return max(self.layer_sizes)

    @property
    def n_layers(self) -> int:
        """T: number of layers."""
        return len(self.layers)

    @property
    def enumerations(self) -> int:
        """Product of layer-size factorials, the exact solver's work bound."""
        return math.prod(math.factorial(n) for n in self.layer_sizes)

    def is_feasible(self, ordering: Sequence[str]) -> bool:
        """Whether ``ordering`` is source, a permutation of each layer in
        turn, then target."""
        if len(ordering) != len(self.tokens) + 2:
            return False
        if ordering[0] != self.source or ordering[-1] != self.target:
            return False
        pos = 1
        for layer in self.layers:
            chunk = ordering[pos : pos + len(layer)]
            if sorted(chunk) != sorted(layer):
                return False
            pos += len(layer)
        return True

    def score(self, ordering: Sequence[str]) -> float:
        """Log-probability of an ordering from source to target, with open
        boundary edges left out."""
        idx = [self.net.index.index(t) for t in ordering]
        lo = 1 if self.open_source else 0
        hi = len(idx) - 1 if self.open_target else len(idx)
        return score_indices(self.net, idx[lo:hi])


@dataclass(frozen=True)
class RecoveryResult:
    """A proposed order for one broken run.

    ``ordering`` includes source and target. ``log_prob`` is NaN when the
    run could not be solved, in which case ``error`` says why and the
    ordering is the stored one.
    """

    ordering: Tuple[str, ...]
    log_prob: float
    solver: str
    layer_sizes: Tuple[int, ...]
    elapsed: float = 0.0
    evaluated: int = 0
    infeasible: bool = False
    error: Optional[str] = None
    trail_id: Optional[str] = None
    run_index: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def layers(self) -> List[List[str]]:
        """Recovered tokens split back into layers."""
        out: List[List[str]] = []
        pos = 1
        for size in self.layer_sizes:
            out.append(list(self.ordering[pos : pos + size]))
            pos += size
        return out

    def to_dict(self, timing: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "trail_id": self.trail_id,
            "run_index": self.run_index,
            "solver": self.solver,
            "ordering": list(self.ordering),
            "layer_sizes": list(self.layer_sizes),
            "log_prob": _encode_float(self.log_prob),
            "evaluated": self.evaluated,
            "infeasible": self.infeasible,
            "error": self.error,
        }
        if timing:
            data["elapsed"] = self.elapsed
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RecoveryResult":
        return cls(
            ordering=tuple(data["ordering"]),
            log_prob=_decode_float(data["log_prob"]),
            solver=data["solver"],
            layer_sizes=tuple(data["layer_sizes"]),
            elapsed=float(data.get("elapsed", 0.0)),
            evaluated=int(data.get("evaluated", 0)),
            infeasible=bool(data.get("infeasible", False)),
            error=data.get("error"),
            trail_id=data.get("trail_id"),
            run_index=data.get("run_index"),
        )


def _encode_float(value: float) -> Any:
    # JSON has no infinities or NaN
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return value


def _decode_float(value: Any) -> float:
    return float(value)


class LayeredGraph:
    """Node view of a SolverInstance shared by the search strategies.

    Node 0 is the source, nodes 1..M are the visit tokens in layer order,
    node M+1 is the target. ``log_p[i, j]`` is log P(j|i) where moving
    from i to j respects layer precedence and -inf otherwise, so that
    ``distance = -log_p`` is the layered ATSP distance matrix.
    """

    def __init__(self, instance: SolverInstance):
        self.instance = instance
        net = instance.net
        tokens = instance.tokens
        self.n_tokens = len(tokens)
        self.source = 0
        self.target = self.n_tokens + 1
        self.n_nodes = self.n_tokens + 2
        self.n_layers = instance.n_layers

        self.loc = np.array(
            [net.index.index(instance.source)]
            + [net.index.index(t) for t in tokens]
            + [net.index.index(instance.target)],
            dtype=np.int64,
        )
        layer = [-1]
        for k, size in enumerate(instance.layer_sizes):
            layer.extend([k] * size)
        layer.append(self.n_layers)
        self.layer = np.array(layer, dtype=np.int64)

        self.layer_nodes: List[List[int]] = [[] for _ in range(self.n_layers)]
        for node in range(1, self.n_tokens + 1):
            self.layer_nodes[int(self.layer[node])].append(node)

        step = self.layer[None, :] - self.layer[:, None]
        allowed = ((step == 0) | (step == 1)) & ~np.eye(self.n_nodes, dtype=bool)
        log_p = np.asarray(net.log_probs)[np.ix_(self.loc, self.loc)]
        if instance.open_source:
            log_p[self.source, :] = 0.0
        if instance.open_target:
            log_p[:, self.target] = 0.0
        self.log_p = np.where(allowed, log_p, -np.inf)
        self.distance = -self.log_p

    def _layer_or_end(self, k: int) -> List[int]:
        if k < 0:
            return [self.source]
        if k >= self.n_layers:
            return [self.target]
        return self.layer_nodes[k]

    def forward_candidates(
        self, node: int, visited: np.ndarray, start_layer: Optional[int] = None
    ) -> List[int]:
        """Nodes that may follow ``node``.

        The current layer must be exhausted before the next one starts,
        except in ``start_layer`` whose leftovers are visited backwards.
        """
        k = int(self.layer[node])
        if 0 <= k < self.n_layers:
            remaining = [n for n in self.layer_nodes[k] if not visited[n]]
            if remaining:
                if k == start_layer:
                    return remaining + self._layer_or_end(k + 1)
                return remaining
        return [n for n in self._layer_or_end(k + 1) if not visited[n]]

    def backward_candidates(self, node: int, visited: np.ndarray) -> List[int]:
        """Nodes that may precede ``node``."""
        k = int(self.layer[node])
        if 0 <= k < self.n_layers:
            remaining = [n for n in self.layer_nodes[k] if not visited[n]]
            if remaining:
                return remaining
        return [n for n in self._layer_or_end(k - 1) if not visited[n]]

    def score(self, nodes: Sequence[int]) -> float:
        """Log-probability of a feasible node path, equal to
        ``SolverInstance.score`` of its ordering."""
        total = 0.0
        for a, b in zip(nodes, nodes[1:]):
            total += float(self.log_p[a, b])
        return total

    def loc_key(self, nodes: Sequence[int]) -> Tuple[int, ...]:
        """Interned-index sequence used for lexicographic tie-breaking."""
        return tuple(int(self.loc[n]) for n in nodes)

    def ordering(self, nodes: Sequence[int]) -> Tuple[str, ...]:
        index = self.instance.net.index
        return tuple(index.token(int(self.loc[n])) for n in nodes)

    def result(
        self,
        nodes: Sequence[int],
        solver: str,
        started: float,
        evaluated: int,
    ) -> RecoveryResult:
        ordering = self.ordering(nodes)
        log_prob = self.score(nodes)
        return RecoveryResult(
            ordering=ordering,
            log_prob=log_prob,
            solver=solver,
            layer_sizes=self.instance.layer_sizes,
            elapsed=time.perf_counter() - started,
            evaluated=evaluated,
            infeasible=log_prob == -math.inf,
        )


def is_better(
    score: float,
    key: Tuple[int, ...],
    best_score: Optional[float],
    best_key: Optional[Tuple[int, ...]],
) -> bool:
    """Higher score wins; equal scores go to the lexicographically smaller key."""
    if best_score is None or best_key is None:
        return True
    if score != best_score:
        return score > best_score
    return key < best_key


class Solver(ABC):
    """Abstract base class for order recovery strategies."""

    @abstractmethod
    def solve(
        self, instance: SolverInstance, seed: Optional[int] = None
    ) -> RecoveryResult:
        """
        Recover the most probable visiting order for one broken run.

        Args:
            instance: The run to solve
            seed: Seed for stochastic strategies (ignored by deterministic ones)

        Returns:
            The best feasible ordering found
        """
        pass

    @property
    @abstractmethod
    def name(self) -> str:
        """Strategy tag used on the command line and in reports."""
        pass

    @property
    def stochastic(self) -> bool:
        """Whether results depend on the seed."""
        return False


def make_instance(run: BrokenRun, trail: Trail, net: TransitionNetwork) -> SolverInstance:
    """Build the solver instance for a run detected in ``trail``.

    A run at the edge of a trail without sentinels gets an open boundary
    there, so its score rests on the observed transitions alone.
    """
    return SolverInstance(
        net=net,
        layers=tuple(tuple(layer) for layer in run.layer_tokens(trail)),
        source=run.source,
        target=run.target,
        run=run,
        open_source=run.source_index is None,
        open_target=run.target_index is None,
    )


def _failed_result(
    run: BrokenRun, trail: Trail, solver: Solver, error: BaseException
) -> RecoveryResult:
    layers = run.layer_tokens(trail)
    return RecoveryResult(
        ordering=(run.source, *[t for layer in layers for t in layer], run.target),
        log_prob=math.nan,
        solver=solver.name,
        layer_sizes=tuple(len(layer) for layer in layers),
        error=f"{type(error).__name__}: {error}",
    )


def recover_trail(
    trail: Trail,
    net: TransitionNetwork,
    solver: Solver,
    seed: Optional[int] = None,
) -> Tuple[Trail, List[RecoveryResult]]:
    """Solve every broken run of ``trail`` independently.

    Records inside each run are rewritten in recovered order, timestamps
    unchanged; all other records are left alone. A run that fails keeps
    its stored order and reports the error in its result.
    """
    locations = trail.locations
    results: List[RecoveryResult] = []

    for run_index, run in enumerate(detect_broken_points(trail)):
        run_seed = derive_seed(seed, run_index) if seed is not None else None
        try:
            instance = make_instance(run, trail, net)
            result = solver.solve(instance, seed=run_seed)
        except TrailRecoverError as e:
            result = replace(
                _failed_result(run, trail, solver, e),
                trail_id=trail.trail_id,
                run_index=run_index,
            )
            results.append(result)
            pub.sendMessage(
                topics.SOLVER_RUN_FAILED,
                trail_id=trail.trail_id,
                run_index=run_index,
                error=result.error,
            )
            continue

        result = replace(result, trail_id=trail.trail_id, run_index=run_index)
        for member, location in zip(run.members, result.ordering[1:-1]):
            locations[member] = location
        results.append(result)
        pub.sendMessage(
            topics.SOLVER_RUN_SOLVED,
            trail_id=trail.trail_id,
            run_index=run_index,
            result=result,
        )

    return trail.with_locations(locations), results


def recover_trails(
    trails: Iterable[Trail],
    net: TransitionNetwork,
    solver: Solver,
    seed: Optional[int] = None,
) -> Tuple[List[Trail], List[RecoveryResult]]:
    """recover_trail over a trail set with per-trail derived seeds."""
    repaired: List[Trail] = []
    results: List[RecoveryResult] = []
    for i, trail in enumerate(trails):
        trail_seed = derive_seed(seed, i) if seed is not None else None
        fixed, trail_results = recover_trail(trail, net, solver, trail_seed)
        repaired.append(fixed)
        results.extend(trail_results)
    return repaired, results
