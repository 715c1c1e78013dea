"""
Metrics

Scores recovered orders against answer keys: per-broken-point accuracy,
per-run Hamming distance, and the broken-point length statistics.
"""

from __future__ import annotations
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
from pubsub import pub

from . import topics
from .errors import InvalidInputError, KeyMismatchError
from .trail_model import RunSequence


def hamming(a: Sequence, b: Sequence) -> int:
    """Number of positions where ``a`` and ``b`` differ.

    Raises:
        InvalidInputError: if the lengths differ.
    """
    if len(a) != len(b):
        raise InvalidInputError(
            f"Hamming distance needs equal lengths, got {len(a)} and {len(b)}"
        )
    return sum(x != y for x, y in zip(a, b))


@dataclass
class SizeStats:
    """Accuracy of broken points of one size."""

    n_points: int = 0
    n_correct: int = 0
    slot_hamming: int = 0

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_points if self.n_points else 1.0

    @property
    def avg_slot_hamming(self) -> float:
        return self.slot_hamming / self.n_points if self.n_points else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_points": self.n_points,
            "accuracy": self.accuracy,
            "avg_slot_hamming": self.avg_slot_hamming,
        }


@dataclass
class GroupStats:
    """Accuracy and Hamming summary for one subpopulation."""

    n_runs: int = 0
    n_points: int = 0
    n_correct: int = 0
    run_hamming: int = 0

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_points if self.n_points else 1.0

    @property
    def avg_hamming(self) -> float:
        return self.run_hamming / self.n_runs if self.n_runs else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_runs": self.n_runs,
            "n_points": self.n_points,
            "accuracy": self.accuracy,
            "avg_hamming": self.avg_hamming,
        }


@dataclass
class EvalReport:
    """Recovery quality over a set of broken runs.

    ``accuracy`` is the fraction of broken points whose within-slot order
    was recovered exactly; ``avg_hamming`` averages the Hamming distance
    over whole run windows. Lengths count tokens: per slot for broken
    points, per run for continuous broken points.
    """

    n_broken_trails: int = 0
    n_broken_points: int = 0
    n_runs: int = 0
    accuracy: float = 1.0
    avg_hamming: float = 0.0
    avg_slot_hamming: float = 0.0
    avg_bp_length: float = 0.0
    std_bp_length: float = 0.0
    max_bp_length: int = 0
    avg_run_length: float = 0.0
    std_run_length: float = 0.0
    max_run_length: int = 0
    avg_layers_per_run: float = 0.0
    by_size: Dict[int, SizeStats] = field(default_factory=dict)
    groups: Dict[str, GroupStats] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["by_size"] = {str(k): v.to_dict() for k, v in sorted(self.by_size.items())}
        data["groups"] = {k: v.to_dict() for k, v in sorted(self.groups.items())}
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvalReport":
        scalars = {k: v for k, v in data.items() if k not in ("by_size", "groups")}
        report = cls(**scalars)
        for size, stats in data.get("by_size", {}).items():
            n = int(stats["n_points"])
            report.by_size[int(size)] = SizeStats(
                n_points=n,
                n_correct=round(stats["accuracy"] * n),
                slot_hamming=round(stats["avg_slot_hamming"] * n),
            )
        for name, stats in data.get("groups", {}).items():
            runs = int(stats["n_runs"])
            points = int(stats["n_points"])
            report.groups[name] = GroupStats(
                n_runs=runs,
                n_points=points,
                n_correct=round(stats["accuracy"] * points),
                run_hamming=round(stats["avg_hamming"] * runs),
            )
        return report


def _by_key(runs: Iterable[RunSequence], what: str) -> Dict[str, RunSequence]:
    out: Dict[str, RunSequence] = {}
    for run in runs:
        if run.key in out:
            raise InvalidInputError(f"Duplicate {what} for run {run.key}")
        out[run.key] = run
    return out


def _mean_std(values: List[int]) -> tuple:
    if not values:
        return 0.0, 0.0
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std())


def evaluate(
    answers: Iterable[RunSequence],
    recoveries: Iterable[RunSequence],
    groups: Optional[Mapping[str, str]] = None,
) -> EvalReport:
    """Compare recovered run orders against the answer key.

    A broken point is correct when its recovered slot order equals the
    truth, also inside multi-slot runs. ``groups`` maps trail ids to a
    group label for a per-group breakdown; unlisted trails are skipped
    there.

    Raises:
        KeyMismatchError: if the two sides do not cover the same runs.
        InvalidInputError: if a run's layer sizes disagree between sides.
    """
    truth = _by_key(answers, "answer")
    recovered = _by_key(recoveries, "recovery")
    missing = truth.keys() - recovered.keys()
    extra = recovered.keys() - truth.keys()
    if missing or extra:
        raise KeyMismatchError(missing, extra)

    report = EvalReport()
    bp_lengths: List[int] = []
    run_lengths: List[int] = []
    layer_counts: List[int] = []
    run_hammings: List[int] = []
    slot_hammings: List[int] = []
    correct = 0
    broken_trails = set()
    group_stats: Dict[str, GroupStats] = defaultdict(GroupStats)
    by_size: Dict[int, SizeStats] = defaultdict(SizeStats)

    for key in sorted(truth):
        want, got = truth[key], recovered[key]
        if [len(x) for x in want.layers] != [len(x) for x in got.layers]:
            raise InvalidInputError(
                f"Run {key}: layer sizes differ between answer and recovery"
            )

        broken_trails.add(want.trail_id)
        run_h = hamming(want.tokens, got.tokens)
        run_hammings.append(run_h)
        run_lengths.append(want.size)
        layer_counts.append(len(want.layers))

        run_correct = 0
        for true_layer, rec_layer in zip(want.layers, got.layers):
            slot_h = hamming(true_layer, rec_layer)
            stats = by_size[len(true_layer)]
            stats.n_points += 1
            stats.slot_hamming += slot_h
            if slot_h == 0:
                stats.n_correct += 1
                run_correct += 1
            slot_hammings.append(slot_h)
            bp_lengths.append(len(true_layer))
        correct += run_correct

        label = groups.get(want.trail_id) if groups is not None else None
        if label is not None:
            g = group_stats[label]
            g.n_runs += 1
            g.n_points += len(want.layers)
            g.n_correct += run_correct
            g.run_hamming += run_h

    report.n_broken_trails = len(broken_trails)
    report.n_broken_points = len(bp_lengths)
    report.n_runs = len(run_lengths)
    if bp_lengths:
        report.accuracy = correct / len(bp_lengths)
        report.avg_hamming = float(np.mean(run_hammings))
        report.avg_slot_hamming = float(np.mean(slot_hammings))
        report.max_bp_length = max(bp_lengths)
        report.max_run_length = max(run_lengths)
        report.avg_layers_per_run = float(np.mean(layer_counts))
    report.avg_bp_length, report.std_bp_length = _mean_std(bp_lengths)
    report.avg_run_length, report.std_run_length = _mean_std(run_lengths)
    report.by_size = dict(sorted(by_size.items()))
    report.groups = dict(sorted(group_stats.items()))

    pub.sendMessage(topics.METRICS_EVALUATED, report=report)
    return report


def format_report(report: EvalReport, title: str = "Evaluation") -> str:
    """Human-readable table of an EvalReport."""
    lines = [
        title,
        "=" * len(title),
        f"  broken trails          {report.n_broken_trails}",
        f"  broken points          {report.n_broken_points}",
        f"  broken runs            {report.n_runs}",
        f"  accuracy               {report.accuracy:.4f}",
        f"  avg hamming (per run)  {report.avg_hamming:.4f}",
        f"  avg hamming (per slot) {report.avg_slot_hamming:.4f}",
        f"  bp length avg/std/max  {report.avg_bp_length:.2f} / "
        f"{report.std_bp_length:.2f} / {report.max_bp_length}",
        f"  run length avg/std/max {report.avg_run_length:.2f} / "
        f"{report.std_run_length:.2f} / {report.max_run_length}",
        f"  layers per run         {report.avg_layers_per_run:.2f}",
    ]
    if report.by_size:
        lines.append("  by broken-point size:")
        for size, stats in report.by_size.items():
            lines.append(
                f"    {size:>3}  n={stats.n_points:<6} accuracy={stats.accuracy:.4f}"
            )
    if report.groups:
        lines.append("  by group:")
        for name, g in report.groups.items():
            lines.append(
                f"    {name:<12} runs={g.n_runs:<6} accuracy={g.accuracy:.4f} "
                f"hamming={g.avg_hamming:.4f}"
            )
    return "\n".join(lines)
