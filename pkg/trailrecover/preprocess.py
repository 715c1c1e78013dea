"""
Preprocessing

Phase 1 of the recovery framework: cut trails at gap points and frame
every partition with BEGIN/END sentinel records.
"""

from __future__ import annotations
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List

from pubsub import pub

from . import topics
from .errors import ConfigError, InvalidTrailError
from .trail_model import (
    SENTINEL_BEGIN,
    SENTINEL_END,
    TimeUnit,
    Trail,
    TrailRecord,
)

DEFAULT_GAP_DAYS = 28
_SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class GapPolicy:
    """Consecutive records further apart than ``threshold`` ticks are cut."""

    threshold: int = DEFAULT_GAP_DAYS

    def __post_init__(self):
        if isinstance(self.threshold, bool) or not isinstance(self.threshold, int):
            raise ConfigError(f"Gap threshold must be an integer, got {self.threshold!r}")
        if self.threshold <= 0:
            raise ConfigError(f"Gap threshold must be > 0, got {self.threshold}")

    @classmethod
    def default_for(cls, unit: TimeUnit) -> "GapPolicy":
        """28 days expressed in the given tick unit."""
        if unit is TimeUnit.SECONDS:
            return cls(DEFAULT_GAP_DAYS * _SECONDS_PER_DAY)
        return cls(DEFAULT_GAP_DAYS)


def partition_at_gaps(trail: Trail, policy: GapPolicy) -> List[Trail]:
    """Split a trail wherever two consecutive records are more than
    ``policy.threshold`` ticks apart.

    Partitions are named ``<trail_id>#<k>`` and remember the original id
    in ``origin_id``.
    """
    pieces: List[List[TrailRecord]] = [[trail.records[0]]]
    for prev, record in zip(trail.records, trail.records[1:]):
        if record.time - prev.time > policy.threshold:
            pieces.append([])
        pieces[-1].append(record)

    base = trail.base_id
    return [
        Trail(f"{trail.trail_id}#{k}", tuple(piece), origin_id=base)
        for k, piece in enumerate(pieces)
    ]


def add_sentinels(trail: Trail) -> Trail:
    """Prepend ``_BEGIN_`` and append ``_END_``.

    Sentinels copy the timestamp of the adjacent real record so they
    never create a gap.

    Raises:
        InvalidTrailError: if the trail already contains a sentinel.
    """
    if trail.has_sentinels:
        raise InvalidTrailError(f"Trail {trail.trail_id!r} already has sentinels")
    first, last = trail.records[0], trail.records[-1]
    return trail.with_records(
        (TrailRecord(SENTINEL_BEGIN, first.time),)
        + trail.records
        + (TrailRecord(SENTINEL_END, last.time),)
    )


def strip_sentinels(trail: Trail) -> Trail:
    """Inverse of add_sentinels."""
    return trail.with_records(r for r in trail.records if not r.is_sentinel)


def preprocess_trails(
    trails: Iterable[Trail],
    policy: GapPolicy,
    sentinels: bool = True,
    partition: bool = True,
) -> List[Trail]:
    """Run phase 1 over a trail set.

    Partitioning happens before sentinel augmentation. Either step can be
    switched off to measure its contribution.
    """
    trails = list(trails)
    out: List[Trail] = []
    for trail in trails:
        parts = partition_at_gaps(trail, policy) if partition else [trail]
        for part in parts:
            out.append(add_sentinels(part) if sentinels else part)

    pub.sendMessage(
        topics.PREPROCESS_PARTITIONED, n_input=len(trails), n_output=len(out)
    )
    return out


def reassemble(trails: Iterable[Trail]) -> List[Trail]:
    """Glue partitions back into their original trails.

    Sentinels are dropped. Partitions must arrive in their original order;
    trails without ``origin_id`` pass through unchanged.
    """
    grouped: Dict[str, List[TrailRecord]] = {}
    for trail in trails:
        grouped.setdefault(trail.base_id, []).extend(
            r for r in trail.records if not r.is_sentinel
        )
    return [Trail(trail_id, tuple(records)) for trail_id, records in grouped.items()]


def interval_distribution(trails: Iterable[Trail]) -> Dict[int, int]:
    """Histogram of time deltas between consecutive real records.

    Useful for choosing a gap threshold by inspection.
    """
    counts: Counter = Counter()
    for trail in trails:
        times = [r.time for r in trail.records if not r.is_sentinel]
        counts.update(b - a for a, b in zip(times, times[1:]))
    return dict(sorted(counts.items()))
