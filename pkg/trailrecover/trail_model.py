"""
Trail Model

Core domain types shared by every other module: trails, records,
broken points and location interning.
"""

from __future__ import annotations
from dataclasses import dataclass
from datetime import date, datetime, timezone
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import InvalidTrailError, UnknownLocationError

SENTINEL_BEGIN = "_BEGIN_"
SENTINEL_END = "_END_"
SENTINELS = frozenset({SENTINEL_BEGIN, SENTINEL_END})

_EPOCH = date(1970, 1, 1)


class TimeUnit(Enum):
    """Unit of one timestamp tick, carried as dataset metadata."""

    TICKS = "ticks"
    DAYS = "days"
    SECONDS = "seconds"

    def parse(self, raw: str) -> int:
        """Convert a raw timestamp field to integer ticks.

        Integers are taken as ticks in every unit. ISO-8601 dates are
        accepted for ``days`` and ``seconds``, counted from 1970-01-01 UTC.

        Raises:
            ValueError: if the field is neither an integer nor a date the
                unit can convert.
        """
        text = raw.strip()
        try:
            ticks = int(text)
        except ValueError:
            ticks = self._parse_iso(text)
        if ticks < 0:
            raise ValueError(f"negative timestamp {raw!r}")
        return ticks

    def _parse_iso(self, text: str) -> int:
        if self is TimeUnit.TICKS:
            raise ValueError(f"timestamp {text!r} is not an integer tick")
        if self is TimeUnit.DAYS:
            return (date.fromisoformat(text[:10]) - _EPOCH).days
        moment = datetime.fromisoformat(text)
        if moment.tzinfo is None:
            moment = moment.replace(tzinfo=timezone.utc)
        return int(moment.timestamp())


@dataclass(frozen=True)
class TrailRecord:
    """One location visit: where and when."""

    location: str
    time: int

    def __post_init__(self):
        if not isinstance(self.location, str) or not self.location:
            raise InvalidTrailError("Location must be a non-empty string")
        if isinstance(self.time, bool) or not isinstance(self.time, int):
            raise InvalidTrailError(f"Timestamp must be an integer, got {self.time!r}")
        if self.time < 0:
            raise InvalidTrailError(f"Timestamp must be >= 0, got {self.time}")

    @property
    def is_sentinel(self) -> bool:
        return self.location in SENTINELS


@dataclass(frozen=True)
class Trail:
    """A time-ordered sequence of location visits by one object.

    ``origin_id`` names the trail a partition was cut from; it is ``None``
    for trails that were never partitioned.
    """

    trail_id: str
    records: Tuple[TrailRecord, ...]
    origin_id: Optional[str] = None

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        if not records:
            raise InvalidTrailError(f"Trail {self.trail_id!r} has no records")
        for i in range(1, len(records)):
            if records[i].time < records[i - 1].time:
                raise InvalidTrailError(
                    f"Trail {self.trail_id!r}: timestamp decreases at record {i} "
                    f"({records[i - 1].time} -> {records[i].time})"
                )
        self._check_sentinels(records)

    def _check_sentinels(self, records: Tuple[TrailRecord, ...]):
        """Sentinels appear only as a BEGIN/END pair around real records."""
        flags = [r.is_sentinel for r in records]
        if not any(flags):
            return
        if (
            len(records) < 3
            or records[0].location != SENTINEL_BEGIN
            or records[-1].location != SENTINEL_END
            or any(flags[1:-1])
        ):
            raise InvalidTrailError(
                f"Trail {self.trail_id!r}: {SENTINEL_BEGIN} and {SENTINEL_END} are "
                "reserved for the first and last record of an augmented trail"
            )

    @classmethod
    def from_pairs(
        cls,
        trail_id: str,
        pairs: Iterable[Tuple[str, int]],
        origin_id: Optional[str] = None,
    ) -> "Trail":
        """Build a trail from (location, time) pairs."""
        return cls(
            trail_id, tuple(TrailRecord(loc, t) for loc, t in pairs), origin_id
        )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TrailRecord]:
        return iter(self.records)

    @property
    def base_id(self) -> str:
        """Identifier of the unpartitioned trail this one belongs to."""
        return self.origin_id if self.origin_id is not None else self.trail_id

    @property
    def locations(self) -> List[str]:
        return [r.location for r in self.records]

    @property
    def times(self) -> List[int]:
        return [r.time for r in self.records]

    @property
    def has_sentinels(self) -> bool:
        return any(r.is_sentinel for r in self.records)

    def with_records(self, records: Iterable[TrailRecord]) -> "Trail":
        """Copy of this trail with a different record list."""
        return Trail(self.trail_id, tuple(records), self.origin_id)

    def with_locations(self, locations: Sequence[str]) -> "Trail":
        """Copy of this trail with locations replaced, timestamps kept."""
        if len(locations) != len(self.records):
            raise InvalidTrailError(
                f"Trail {self.trail_id!r}: expected {len(self.records)} locations, "
                f"got {len(locations)}"
            )
        return self.with_records(
            TrailRecord(loc, r.time) for loc, r in zip(locations, self.records)
        )


class LocationIndex:
    """Bijective interning of location tokens to dense integer indices.

    Indices are assigned in first-seen order. The two sentinels are
    interned first, at indices 0 and 1.
    """

    def __init__(self, tokens: Iterable[str] = ()):
        self._tokens: List[str] = []
        self._index: Dict[str, int] = {}
        self.intern(SENTINEL_BEGIN)
        self.intern(SENTINEL_END)
        for token in tokens:
            self.intern(token)

    def intern(self, token: str) -> int:
        """Return the index of ``token``, assigning the next one if new."""
        idx = self._index.get(token)
        if idx is None:
            if not token:
                raise InvalidTrailError("Location must be a non-empty string")
            idx = len(self._tokens)
            self._tokens.append(token)
            self._index[token] = idx
        return idx

    def index(self, token: str) -> int:
        """Look up an already interned token."""
        try:
            return self._index[token]
        except KeyError:
            raise UnknownLocationError(token) from None

    def token(self, idx: int) -> str:
        return self._tokens[idx]

    @property
    def tokens(self) -> List[str]:
        return list(self._tokens)

    def __contains__(self, token: object) -> bool:
        return token in self._index

    def __len__(self) -> int:
        return len(self._tokens)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LocationIndex) and self._tokens == other._tokens

    def __repr__(self) -> str:
        return f"LocationIndex({len(self._tokens)} tokens)"


@dataclass(frozen=True)
class BrokenPoint:
    """A time slot whose records span two or more distinct locations."""

    slot_time: int
    members: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class BrokenRun:
    """A maximal group of consecutive broken points, solved jointly.

    ``source_index``/``target_index`` point at the records just outside
    the run, or are ``None`` when the run touches a trail boundary and the
    corresponding sentinel stands in.
    """

    layers: Tuple[BrokenPoint, ...]
    source: str
    target: str
    source_index: Optional[int] = None
    target_index: Optional[int] = None

    @property
    def members(self) -> List[int]:
        return [m for layer in self.layers for m in layer.members]

    @property
    def size(self) -> int:
        """Number of visit tokens in the run."""
        return sum(layer.size for layer in self.layers)

    @property
    def slot_times(self) -> List[int]:
        return [layer.slot_time for layer in self.layers]

    def layer_tokens(self, trail: Trail) -> List[List[str]]:
        """Location tokens of each layer, in stored order."""
        return [
            [trail.records[m].location for m in layer.members] for layer in self.layers
        ]


def _slots(trail: Trail) -> List[Tuple[int, List[int]]]:
    """Group non-sentinel record indices by shared timestamp."""
    slots: List[Tuple[int, List[int]]] = []
    for i, record in enumerate(trail.records):
        if record.is_sentinel:
            continue
        if slots and slots[-1][0] == record.time:
            slots[-1][1].append(i)
        else:
            slots.append((record.time, [i]))
    return slots


def detect_broken_points(trail: Trail) -> List[BrokenRun]:
    """Find every maximal run of consecutive broken time slots.

    Sentinel records never join a slot. A slot is broken when its records
    cover at least two distinct locations.
    """
    runs: List[BrokenRun] = []
    current: List[BrokenPoint] = []

    def close_run():
        first = current[0].members[0]
        last = current[-1].members[-1]
        source_index = first - 1 if first > 0 else None
        target_index = last + 1 if last + 1 < len(trail) else None
        runs.append(
            BrokenRun(
                layers=tuple(current),
                source=(
                    trail.records[source_index].location
                    if source_index is not None
                    else SENTINEL_BEGIN
                ),
                target=(
                    trail.records[target_index].location
                    if target_index is not None
                    else SENTINEL_END
                ),
                source_index=source_index,
                target_index=target_index,
            )
        )

    for slot_time, members in _slots(trail):
        distinct = {trail.records[m].location for m in members}
        if len(distinct) >= 2:
            current.append(BrokenPoint(slot_time, tuple(members)))
        elif current:
            close_run()
            current = []
    if current:
        close_run()
    return runs


def broken_member_set(trail: Trail) -> set:
    """Indices of all records that lie inside a broken point."""
    return {m for run in detect_broken_points(trail) for m in run.members}


@dataclass(frozen=True)
class RunSequence:
    """Locations of one broken run, layer by layer.

    Used both for ground-truth answer keys and for recovered orders, keyed
    by the unpartitioned trail id and the run's position in that trail.
    """

    trail_id: str
    run_index: int
    slot_times: Tuple[int, ...]
    layers: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "slot_times", tuple(self.slot_times))
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        if len(self.slot_times) != len(self.layers):
            raise InvalidTrailError(
                f"Run {self.key}: {len(self.slot_times)} slot times for "
                f"{len(self.layers)} layers"
            )

    @property
    def key(self) -> str:
        return f"{self.trail_id}/{self.run_index}"

    @property
    def tokens(self) -> List[str]:
        return [t for layer in self.layers for t in layer]

    @property
    def size(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def to_dict(self) -> Dict[str, object]:
        return {
            "trail_id": self.trail_id,
            "run_index": self.run_index,
            "slot_times": list(self.slot_times),
            "layers": [list(layer) for layer in self.layers],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RunSequence":
        return cls(
            trail_id=str(data["trail_id"]),
            run_index=int(data["run_index"]),
            slot_times=tuple(int(t) for t in data["slot_times"]),
            layers=tuple(tuple(layer) for layer in data["layers"]),
        )


def run_sequences(trail: Trail, truth: Optional[Trail] = None) -> List[RunSequence]:
    """Broken runs of ``trail`` as RunSequences.

    Locations are read from ``truth`` when given (record for record), so a
    degraded trail and its original yield the answer key.
    """
    source = truth if truth is not None else trail
    if len(source) != len(trail):
        raise InvalidTrailError(
            f"Trail {trail.trail_id!r}: truth has {len(source)} records, "
            f"expected {len(trail)}"
        )
    return [
        RunSequence(
            trail_id=trail.base_id,
            run_index=k,
            slot_times=tuple(run.slot_times),
            layers=tuple(
                tuple(source.records[m].location for m in layer.members)
                for layer in run.layers
            ),
        )
        for k, run in enumerate(detect_broken_points(trail))
    ]
