"""
Transition Network

Phase 2 of the recovery framework: first-order Markov transition
probabilities estimated from the unbroken parts of trails, and the
negative-log distances the solvers minimise.
"""

from __future__ import annotations
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pubsub import pub

from . import topics
from .errors import ConfigError, EmptyInputError, InvalidInputError
from .trail_model import LocationIndex, Trail, broken_member_set

DEFAULT_FLOOR_PROB = 1e-9


class SmoothingMode(Enum):
    """How unobserved transitions are priced."""

    NONE = "none"
    FLOOR = "floor"


@dataclass(frozen=True)
class SmoothingPolicy:
    """Probability assigned to unobserved transitions when queried.

    ``floor_prob`` is only used in ``floor`` mode.
    """

    mode: SmoothingMode = SmoothingMode.NONE
    floor_prob: float = DEFAULT_FLOOR_PROB

    def __post_init__(self):
        if not isinstance(self.mode, SmoothingMode):
            object.__setattr__(self, "mode", SmoothingMode(self.mode))
        if not 0.0 < self.floor_prob < 1.0:
            raise ConfigError(f"floor_prob must be in (0, 1), got {self.floor_prob}")


class TransitionNetwork:
    """Markov transition counts and probabilities between locations.

    ``counts[a, b]`` is the number of observed consecutive a -> b pairs
    outside broken points; ``probs`` divides each row by its total.
    The network is treated as immutable once built.
    """

    def __init__(
        self,
        index: LocationIndex,
        counts: np.ndarray,
        smoothing: Optional[SmoothingPolicy] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        counts = np.array(counts, dtype=np.int64)
        n = len(index)
        if counts.shape != (n, n):
            raise InvalidInputError(
                f"Count matrix shape {counts.shape} does not match {n} locations"
            )
        if (counts < 0).any():
            raise InvalidInputError("Transition counts must be non-negative")

        self.index = index
        self.counts = counts
        self.counts.setflags(write=False)
        self.smoothing = smoothing or SmoothingPolicy()
        self.metadata: Dict[str, Any] = dict(metadata or {})

        self.out_totals = counts.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            probs = np.where(
                self.out_totals[:, None] > 0,
                counts / np.maximum(self.out_totals, 1)[:, None],
                0.0,
            )
        self.probs = probs
        self.probs.setflags(write=False)

        if self.smoothing.mode is SmoothingMode.FLOOR and (probs > 0).any():
            min_observed = float(probs[probs > 0].min())
            if self.smoothing.floor_prob >= min_observed:
                raise ConfigError(
                    f"floor_prob {self.smoothing.floor_prob} must be below the "
                    f"smallest observed probability {min_observed}"
                )

        with np.errstate(divide="ignore"):
            log_probs = np.log(probs)
        if self.smoothing.mode is SmoothingMode.FLOOR:
            log_probs[probs == 0] = math.log(self.smoothing.floor_prob)
        self.log_probs = log_probs
        self.log_probs.setflags(write=False)

    @classmethod
    def from_counts(
        cls,
        tokens: Sequence[str],
        pair_counts: Dict[Tuple[str, str], int],
        smoothing: Optional[SmoothingPolicy] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> "TransitionNetwork":
        """Build a network from a {(from, to): count} mapping."""
        index = LocationIndex(tokens)
        for a, b in pair_counts:
            index.intern(a)
            index.intern(b)
        counts = np.zeros((len(index), len(index)), dtype=np.int64)
        for (a, b), c in pair_counts.items():
            counts[index.index(a), index.index(b)] += c
        return cls(index, counts, smoothing, metadata)

    @property
    def locations(self) -> List[str]:
        return self.index.tokens

    def __len__(self) -> int:
        return len(self.index)

    def prob(self, a: str, b: str) -> float:
        """Estimated P(b | a), without smoothing."""
        return float(self.probs[self.index.index(a), self.index.index(b)])

    def log_prob(self, a: str, b: str) -> float:
        """log P(b | a) as seen by the solvers (smoothing applied)."""
        return float(self.log_probs[self.index.index(a), self.index.index(b)])

    def distance(self, a: str, b: str) -> float:
        """-log P(b | a); +inf for forbidden edges when smoothing is off."""
        return -self.log_prob(a, b)

    def successors(self, a: str) -> Dict[str, float]:
        """Observed successors of ``a`` with their probabilities."""
        row = self.probs[self.index.index(a)]
        return {self.index.token(int(j)): float(row[j]) for j in np.flatnonzero(row)}

    def with_smoothing(self, smoothing: SmoothingPolicy) -> "TransitionNetwork":
        return TransitionNetwork(self.index, self.counts, smoothing, self.metadata)

    def merge(self, other: "TransitionNetwork") -> "TransitionNetwork":
        """Sum the counts of two networks over the union of their locations."""
        index = LocationIndex(self.index.tokens + other.index.tokens)
        counts = np.zeros((len(index), len(index)), dtype=np.int64)
        for net in (self, other):
            remap = np.array([index.index(t) for t in net.index.tokens])
            counts[np.ix_(remap, remap)] += net.counts
        return TransitionNetwork(index, counts, self.smoothing, self.metadata)

    def pair_counts(self) -> List[Tuple[str, str, int]]:
        """Sparse (from, to, count) triplets, row-major."""
        rows, cols = np.nonzero(self.counts)
        return [
            (self.index.token(int(i)), self.index.token(int(j)), int(self.counts[i, j]))
            for i, j in zip(rows, cols)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "locations": self.index.tokens,
            "counts": [list(t) for t in self.pair_counts()],
            "smoothing": {
                "mode": self.smoothing.mode.value,
                "floor_prob": self.smoothing.floor_prob,
            },
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TransitionNetwork":
        try:
            index = LocationIndex(data["locations"])
            counts = np.zeros((len(index), len(index)), dtype=np.int64)
            for a, b, c in data["counts"]:
                counts[index.index(a), index.index(b)] += int(c)
            smoothing = SmoothingPolicy(**data.get("smoothing", {}))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError(f"Malformed transition network: {e}") from e
        return cls(index, counts, smoothing, data.get("metadata"))

    def __repr__(self) -> str:
        return (
            f"TransitionNetwork({len(self.index)} locations, "
            f"{int(self.counts.sum())} pairs, smoothing={self.smoothing.mode.value})"
        )


def unbroken_pairs(trail: Trail) -> Iterable[Tuple[str, str]]:
    """Consecutive location pairs with neither record inside a broken point."""
    broken = broken_member_set(trail)
    records = trail.records
    for i in range(len(records) - 1):
        if i in broken or i + 1 in broken:
            continue
        yield records[i].location, records[i + 1].location


def extract(
    trails: Iterable[Trail],
    smoothing: Optional[SmoothingPolicy] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> TransitionNetwork:
    """Estimate P(B|A) = N(A->B) / N(A) from unbroken subsequences.

    Every location in the input is interned, including those seen only
    inside broken points (their row total stays zero).

    Raises:
        EmptyInputError: if ``trails`` is empty.
    """
    trails = list(trails)
    if not trails:
        raise EmptyInputError("Cannot extract a transition network from no trails")

    index = LocationIndex()
    for trail in trails:
        for record in trail.records:
            index.intern(record.location)

    pairs: Counter = Counter()
    for trail in trails:
        pairs.update(unbroken_pairs(trail))

    counts = np.zeros((len(index), len(index)), dtype=np.int64)
    for (a, b), c in pairs.items():
        counts[index.index(a), index.index(b)] = c

    net = TransitionNetwork(index, counts, smoothing, metadata)
    pub.sendMessage(
        topics.TRANSITION_EXTRACTED,
        n_locations=len(index),
        n_pairs=int(counts.sum()),
    )
    return net


def neg_log_distance(net: TransitionNetwork, a: str, b: str) -> float:
    """Distance of the edge a -> b: -log P(b|a).

    Unobserved edges cost +inf without smoothing, -log(floor_prob) with it.

    Raises:
        UnknownLocationError: if ``a`` or ``b`` is not in the network.
    """
    return net.distance(a, b)


def score_sequence(net: TransitionNetwork, seq: Sequence[str]) -> float:
    """Sum of log P(l[k+1] | l[k]) along ``seq``, added left to right.

    Returns -inf when an edge is forbidden (smoothing off).

    Raises:
        InvalidInputError: if ``seq`` has fewer than two elements.
    """
    if len(seq) < 2:
        raise InvalidInputError("A scored sequence needs at least two locations")
    idx = [net.index.index(loc) for loc in seq]
    return score_indices(net, idx)


def score_indices(net: TransitionNetwork, idx: Sequence[int]) -> float:
    """score_sequence over already interned indices."""
    total = 0.0
    for a, b in zip(idx, idx[1:]):
        total += float(net.log_probs[a, b])
    return total
