"""
File Formats

Readers and writers for every on-disk artifact: trail CSV files (raw and
preprocessed) and the JSON documents for networks, answer keys, recovery
results, evaluation and rank reports.
"""

from __future__ import annotations
import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pubsub import pub

from . import topics
from .errors import IngestError, InvalidInputError, InvalidTrailError
from .solvers.solver_base import RecoveryResult
from .trail_model import SENTINELS, RunSequence, TimeUnit, Trail, TrailRecord
from .transition import TransitionNetwork

PathLike = Union[str, Path]

TRAIL_COLUMNS = ("trail_id", "timestamp", "location")
PARTITION_COLUMNS = ("partition_idx", "is_sentinel")

_TRUE = {"1", "true", "yes"}
_FALSE = {"", "0", "false", "no"}


def _flag(raw: Optional[str], line: int, path: str) -> bool:
    value = (raw or "").strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise IngestError(f"is_sentinel must be 0 or 1, got {raw!r}", line, path)


def read_trails_csv(path: PathLike, time_unit: TimeUnit = TimeUnit.TICKS) -> List[Trail]:
    """Load trails from a CSV file with a ``trail_id,timestamp,location`` header.

    Rows must be grouped by trail and sorted by timestamp within a trail.
    Preprocessed files carry ``partition_idx`` and ``is_sentinel``; rows
    of partition p of trail X load as trail ``X#p`` with origin ``X``.
    Sentinel tokens are only accepted on rows flagged ``is_sentinel``.

    Raises:
        IngestError: naming the offending line on any violation.
    """
    where = str(path)
    groups: List[Tuple[str, Optional[str], List[TrailRecord]]] = []
    seen = set()
    n_records = 0

    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in TRAIL_COLUMNS if c not in header]
        if missing:
            raise IngestError(f"header lacks column(s) {', '.join(missing)}", 1, where)
        partitioned = "partition_idx" in header
        flagged = "is_sentinel" in header

        for row in reader:
            line = reader.line_num
            trail_id = (row["trail_id"] or "").strip()
            location = (row["location"] or "").strip()
            if not trail_id:
                raise IngestError("empty trail_id", line, where)
            if not location:
                raise IngestError("empty location", line, where)

            key, origin = trail_id, None
            part = (row.get("partition_idx") or "").strip() if partitioned else ""
            if part:
                if not part.isdigit():
                    raise IngestError(f"partition_idx {part!r} is not an integer", line, where)
                key, origin = f"{trail_id}#{part}", trail_id

            is_sentinel = _flag(row.get("is_sentinel"), line, where) if flagged else False
            if location in SENTINELS and not is_sentinel:
                raise IngestError(f"location {location!r} is a reserved token", line, where)
            if is_sentinel and location not in SENTINELS:
                raise IngestError(
                    f"row flagged as sentinel holds {location!r}", line, where
                )

            try:
                ticks = time_unit.parse(row["timestamp"] or "")
            except ValueError as e:
                raise IngestError(f"bad timestamp: {e}", line, where) from None

            if not groups or groups[-1][0] != key:
                if key in seen:
                    raise IngestError(f"rows of trail {key!r} are not grouped", line, where)
                seen.add(key)
                groups.append((key, origin, []))
            records = groups[-1][2]
            if records and ticks < records[-1].time:
                raise IngestError(
                    f"trail {key!r} is not sorted by timestamp "
                    f"({records[-1].time} -> {ticks})",
                    line,
                    where,
                )
            records.append(TrailRecord(location, ticks))
            n_records += 1

    try:
        trails = [Trail(key, tuple(records), origin) for key, origin, records in groups]
    except InvalidTrailError as e:
        raise IngestError(str(e), None, where) from e

    pub.sendMessage(
        topics.INGEST_LOADED, path=where, n_trails=len(trails), n_records=n_records
    )
    return trails


def write_trails_csv(path: PathLike, trails: Sequence[Trail]):
    """Write trails as CSV.

    When any trail is a partition or holds sentinels, the
    ``partition_idx`` and ``is_sentinel`` columns are added; partitions
    are numbered in order of appearance within their original trail.
    """
    extended = any(t.origin_id is not None or t.has_sentinels for t in trails)
    columns = TRAIL_COLUMNS + (PARTITION_COLUMNS if extended else ())
    part_counter: Dict[str, int] = {}

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for trail in trails:
            part = part_counter.get(trail.base_id, 0)
            part_counter[trail.base_id] = part + 1
            for record in trail.records:
                row: List[Any] = [trail.base_id, record.time, record.location]
                if extended:
                    row += [part, int(record.is_sentinel)]
                writer.writerow(row)


def write_json(path: PathLike, data: Any):
    """Write ``data`` as sorted, indented JSON."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write("\n")


def read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path}: invalid JSON ({e})") from e


def save_network(path: PathLike, net: TransitionNetwork):
    write_json(path, net.to_dict())


def load_network(path: PathLike) -> TransitionNetwork:
    return TransitionNetwork.from_dict(read_json(path))


def runs_to_json(runs: Sequence[RunSequence]) -> List[Dict[str, Any]]:
    return [run.to_dict() for run in sorted(runs, key=lambda r: (r.trail_id, r.run_index))]


def runs_from_json(data: Sequence[Dict[str, Any]]) -> List[RunSequence]:
    try:
        return [RunSequence.from_dict(item) for item in data]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInputError(f"Malformed run list: {e}") from e


def save_answers(path: PathLike, answers: Sequence[RunSequence]):
    write_json(path, {"answers": runs_to_json(answers)})


def load_answers(path: PathLike) -> List[RunSequence]:
    data = read_json(path)
    if not isinstance(data, dict) or "answers" not in data:
        raise InvalidInputError(f"{path}: no 'answers' section")
    return runs_from_json(data["answers"])


def save_results(
    path: PathLike,
    solver: str,
    results: Sequence[RecoveryResult],
    recovered: Sequence[RunSequence],
    timing: bool = True,
):
    """Per-run solver output plus the recovered run orders for evaluation."""
    write_json(
        path,
        {
            "solver": solver,
            "results": [r.to_dict(timing=timing) for r in results],
            "recovered": runs_to_json(recovered),
        },
    )


def load_results(path: PathLike) -> Tuple[List[RecoveryResult], List[RunSequence]]:
    data = read_json(path)
    if not isinstance(data, dict) or "recovered" not in data:
        raise InvalidInputError(f"{path}: no 'recovered' section")
    try:
        results = [RecoveryResult.from_dict(r) for r in data.get("results", [])]
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidInputError(f"{path}: malformed result: {e}") from e
    return results, runs_from_json(data["recovered"])
