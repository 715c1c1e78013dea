"""
Degradation

Turns unbroken trails into benchmark instances with known answers, either
by coarsening the timestamp resolution or by mutating the order inside
fixed-size windows.
"""

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pubsub import pub

from . import topics
from .errors import ConfigError, InvalidTrailError
from .trail_model import RunSequence, Trail, TrailRecord, run_sequences

DEFAULT_MUTATION_FRACTION = 0.20


class DegradeStrategy(Enum):
    RESOLUTION = "resolution"
    MUTATION = "mutation"


@dataclass(frozen=True)
class DegradeSpec:
    """How to degrade a trail set.

    ``resolution`` applies to the resolution strategy, ``v`` and
    ``mutation_fraction`` to the mutation strategy.
    """

    strategy: DegradeStrategy = DegradeStrategy.MUTATION
    resolution: int = 2
    v: int = 2
    mutation_fraction: float = DEFAULT_MUTATION_FRACTION
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.strategy, DegradeStrategy):
            try:
                object.__setattr__(self, "strategy", DegradeStrategy(self.strategy))
            except ValueError:
                raise ConfigError(f"Unknown degrade strategy {self.strategy!r}") from None
        if self.strategy is DegradeStrategy.RESOLUTION and self.resolution < 2:
            raise ConfigError(f"resolution must be >= 2 ticks, got {self.resolution}")
        if self.v < 2:
            raise ConfigError(f"Broken-point size v must be >= 2, got {self.v}")
        if not 0.0 < self.mutation_fraction <= 1.0:
            raise ConfigError(
                f"mutation_fraction must be in (0, 1], got {self.mutation_fraction}"
            )

    @property
    def tag(self) -> str:
        """Short label used to name sweep artifacts."""
        if self.strategy is DegradeStrategy.RESOLUTION:
            return f"res{self.resolution}"
        return f"mut{self.v}"


def collapse_resolution(trail: Trail, resolution: int) -> Trail:
    """Map every timestamp t to floor(t / resolution) * resolution.

    Stored order is kept, so the collapsed trail still holds the true
    order; same-slot order is what the evaluator treats as unknown.
    """
    if resolution < 1:
        raise ConfigError(f"resolution must be >= 1, got {resolution}")
    return trail.with_records(
        TrailRecord(r.location, (r.time // resolution) * resolution)
        for r in trail.records
    )


def resolution_answers(
    trail: Trail, resolution: int
) -> Tuple[Trail, List[RunSequence]]:
    """Collapse ``trail`` and read the answer key off the stored order."""
    degraded = collapse_resolution(trail, resolution)
    return degraded, run_sequences(degraded, truth=trail)


def answer_key(original: Trail, degraded: Trail) -> List[RunSequence]:
    """True order of every broken run of ``degraded``, taken from ``original``
    record for record."""
    return run_sequences(degraded, truth=original)


def _pick_windows(n: int, v: int, count: int, rng: np.random.Generator) -> List[int]:
    """Start positions of up to ``count`` non-overlapping windows of size v."""
    free = np.ones(n, dtype=bool)
    starts: List[int] = []
    for _ in range(count):
        open_starts = np.flatnonzero(sliding_window_view(free, v).all(axis=1))
        if open_starts.size == 0:
            break
        s = int(open_starts[rng.integers(open_starts.size)])
        free[s : s + v] = False
        starts.append(s)
    return sorted(starts)


def mutate_order(
    trail: Trail,
    v: int,
    fraction: float = DEFAULT_MUTATION_FRACTION,
    seed: int = 0,
) -> Tuple[Trail, List[RunSequence]]:
    """Create size-v broken points covering about ``fraction`` of the records.

    Each window i..i+v-1 takes the timestamp of record i and its records
    are shuffled uniformly (the identity permutation included). Windows
    never overlap and never include sentinel records.

    Raises:
        InvalidTrailError: if the trail has fewer than ``v`` real records.
    """
    if v < 2:
        raise ConfigError(f"Broken-point size v must be >= 2, got {v}")
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")

    real = [i for i, r in enumerate(trail.records) if not r.is_sentinel]
    if len(real) < v:
        raise InvalidTrailError(
            f"Trail {trail.trail_id!r} has {len(real)} records, too short for v={v}"
        )

    rng = np.random.default_rng(seed)
    count = max(1, round(fraction * len(real) / v))
    records = list(trail.records)
    for s in _pick_windows(len(real), v, count, rng):
        window = real[s : s + v]
        slot_time = records[window[0]].time
        shuffled = [records[window[j]].location for j in rng.permutation(v)]
        for idx, location in zip(window, shuffled):
            records[idx] = TrailRecord(location, slot_time)

    degraded = trail.with_records(records)
    return degraded, answer_key(trail, degraded)


def degrade_trails(
    trails: Iterable[Trail], spec: DegradeSpec
) -> Tuple[List[Trail], List[RunSequence]]:
    """Apply ``spec`` to every trail.

    Mutation uses seed ``spec.seed ^ i`` for the i-th trail; trails too
    short for one window pass through unchanged.
    """
    degraded: List[Trail] = []
    answers: List[RunSequence] = []
    trails = list(trails)
    for i, trail in enumerate(trails):
        if spec.strategy is DegradeStrategy.RESOLUTION:
            out, keys = resolution_answers(trail, spec.resolution)
        elif sum(not r.is_sentinel for r in trail.records) < spec.v:
            out, keys = trail, answer_key(trail, trail)
        else:
            out, keys = mutate_order(
                trail, spec.v, spec.mutation_fraction, spec.seed ^ i
            )
        degraded.append(out)
        answers.extend(keys)

    pub.sendMessage(
        topics.DEGRADE_APPLIED,
        strategy=spec.strategy.value,
        n_trails=len(degraded),
        n_runs=len(answers),
    )
    return degraded, answers
