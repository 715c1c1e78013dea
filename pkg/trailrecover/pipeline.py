"""
Pipeline

End-to-end experiment: obtain ground-truth trails, degrade them, run the
three recovery phases for every enabled strategy, evaluate, and rank
locations. Every intermediate artifact is written so that each stage can
be re-run on its own from the command line.
"""

from __future__ import annotations
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional

import numpy as np
from pubsub import pub

from . import topics
from .analysis import case_study, format_case_study
from .config import PipelineConfig
from .degrade import degrade_trails
from .errors import BudgetExceeded, EmptyInputError, PhaseError
from .formats import (
    PathLike,
    read_trails_csv,
    save_answers,
    save_network,
    save_results,
    write_json,
    write_trails_csv,
)
from .metrics import EvalReport, evaluate
from .preprocess import preprocess_trails, reassemble
from .seeding import derive_seed
from .solvers import RecoveryResult, SolverRegistry, recover_trails
from .synth import generate
from .trail_model import RunSequence, Trail, run_sequences
from .transition import extract


@contextmanager
def phase(name: str) -> Iterator[None]:
    """Publish phase start/finish and tag any failure with the phase name."""
    pub.sendMessage(topics.PIPELINE_PHASE_STARTED, phase=name)
    started = time.perf_counter()
    try:
        yield
    except PhaseError:
        raise
    except Exception as e:
        raise PhaseError(name, e) from e
    pub.sendMessage(
        topics.PIPELINE_PHASE_FINISHED,
        phase=name,
        elapsed=time.perf_counter() - started,
    )


def recovered_runs(trails: Iterable[Trail]) -> List[RunSequence]:
    """Run orders of recovered trails, keyed like degrade's answer keys.

    Partitions are glued back together first, so keys refer to the
    original trail ids.
    """
    return [run for trail in reassemble(trails) for run in run_sequences(trail)]


def count_budget_failures(results: Iterable[RecoveryResult]) -> int:
    """Runs the exact solver gave up on for exceeding its budget."""
    tag = f"{BudgetExceeded.__name__}:"
    return sum(1 for r in results if r.error is not None and r.error.startswith(tag))


@dataclass
class StrategyOutcome:
    """Accuracy of one strategy under one sweep value and condition."""

    sweep: str
    condition: str
    strategy: str
    reports: List[EvalReport] = field(default_factory=list)
    n_failed: int = 0
    over_budget: bool = False

    @property
    def accuracy(self) -> Optional[float]:
        if self.over_budget:
            return None
        return float(np.mean([r.accuracy for r in self.reports]))

    @property
    def accuracy_std(self) -> Optional[float]:
        if self.over_budget:
            return None
        return float(np.std([r.accuracy for r in self.reports]))

    @property
    def avg_hamming(self) -> Optional[float]:
        if self.over_budget:
            return None
        return float(np.mean([r.avg_hamming for r in self.reports]))

    def to_dict(self) -> Dict[str, Any]:
        first = self.reports[0]
        return {
            "sweep": self.sweep,
            "condition": self.condition,
            "strategy": self.strategy,
            "replicates": len(self.reports),
            "accuracy": self.accuracy,
            "accuracy_std": self.accuracy_std,
            "avg_hamming": self.avg_hamming,
            "n_broken_points": first.n_broken_points,
            "n_runs": first.n_runs,
            "n_failed": self.n_failed,
        }


@dataclass
class PipelineSummary:
    rows: List[StrategyOutcome] = field(default_factory=list)
    case_studies: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def to_dict(self, config: PipelineConfig) -> Dict[str, Any]:
        return {
            "config": config.to_dict(),
            "rows": [row.to_dict() for row in self.rows],
            "case_studies": self.case_studies,
        }


def format_summary(summary: PipelineSummary) -> str:
    """Accuracy table, one line per sweep value, condition and strategy."""
    header = (
        f"{'sweep':<8} {'condition':<10} {'strategy':<8} "
        f"{'accuracy':>10} {'std':>8} {'hamming':>8} {'points':>7}"
    )
    lines = [header, "-" * len(header)]
    for row in summary.rows:
        acc = "N/A" if row.accuracy is None else f"{row.accuracy:.4f}"
        std = "" if row.accuracy_std is None else f"{row.accuracy_std:.4f}"
        ham = "N/A" if row.avg_hamming is None else f"{row.avg_hamming:.4f}"
        lines.append(
            f"{row.sweep:<8} {row.condition:<10} {row.strategy:<8} "
            f"{acc:>10} {std:>8} {ham:>8} {row.reports[0].n_broken_points:>7}"
        )
    for tag, study in summary.case_studies.items():
        lines.append(
            f"{tag}: spearman vs truth, recovered={study['recovered']['spearman_vs']:.3f} "
            f"unrecovered={study['unrecovered']['spearman_vs']:.3f}"
        )
    return "\n".join(lines)


def _load_truth(config: PipelineConfig, out: Path) -> List[Trail]:
    if config.input:
        with phase("ingest"):
            trails = read_trails_csv(config.input, config.time_unit)
            if not trails:
                raise EmptyInputError(f"{config.input} holds no trails")
    else:
        with phase("synth"):
            spec = replace(config.generator, seed=config.stage_seed("synth"))
            dataset = generate(spec)
            trails = dataset.trails
            write_json(out / "hidden.json", dataset.hidden_dict())
    write_trails_csv(out / "trails.csv", trails)
    return trails


def run_pipeline(config: PipelineConfig, out_dir: PathLike) -> PipelineSummary:
    """Run the full experiment and write its artifacts under ``out_dir``.

    Output depends only on the inputs and ``config``: timings are left out
    of every file unless ``config.record_timing`` is set.

    Raises:
        PhaseError: tagged with the failing phase.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config.save(out / "config.json")

    registry = SolverRegistry.default(
        config.acs, config.exact_budget, config.exact_fallback
    )
    solver_seed = config.stage_seed("solver")
    summary = PipelineSummary()
    truth = _load_truth(config, out)

    for spec in config.degrade_specs():
        tag = spec.tag
        tag_dir = out / tag
        with phase(f"degrade[{tag}]"):
            degraded, answers = degrade_trails(truth, spec)
            write_trails_csv(tag_dir / "degraded.csv", degraded)
            save_answers(tag_dir / "answers.json", answers)

        for condition, sentinels, partition in config.conditions():
            cond_dir = tag_dir / condition
            with phase(f"preprocess[{tag}/{condition}]"):
                pre = preprocess_trails(degraded, config.gap, sentinels, partition)
                write_trails_csv(cond_dir / "preprocessed.csv", pre)
            with phase(f"extract[{tag}/{condition}]"):
                net = extract(pre, config.smoothing, {"sweep": tag, "condition": condition})
                save_network(cond_dir / "net.json", net)

            repaired_by_strategy: Dict[str, List[Trail]] = {}
            for name in config.strategies:
                solver = registry.get(name)
                outcome = StrategyOutcome(tag, condition, name)
                reps = config.replicates if solver.stochastic else 1
                with phase(f"recover[{tag}/{condition}/{name}]"):
                    for rep in range(reps):
                        seed = derive_seed(solver_seed, tag, condition, name, rep)
                        repaired, results = recover_trails(pre, net, solver, seed)
                        recovered = recovered_runs(repaired)
                        if count_budget_failures(results):
                            outcome.over_budget = True
                        outcome.n_failed = max(
                            outcome.n_failed, sum(1 for r in results if not r.ok)
                        )
                        report = evaluate(answers, recovered)
                        outcome.reports.append(report)
                        if rep == 0:
                            repaired_by_strategy[name] = repaired
                            write_trails_csv(cond_dir / f"recovered_{name}.csv", repaired)
                            save_results(
                                cond_dir / f"results_{name}.json",
                                name,
                                results,
                                recovered,
                                timing=config.record_timing,
                            )
                            write_json(cond_dir / f"report_{name}.json", report.to_dict())
                summary.rows.append(outcome)

            if config.rank and condition in ("main", "full"):
                with phase(f"rank[{tag}/{condition}]"):
                    strategy = config.ranking_strategy
                    study = case_study(
                        truth,
                        degraded,
                        reassemble(repaired_by_strategy[strategy]),
                        strategy,
                    )
                    write_json(cond_dir / "rank.json", study.to_dict())
                    (cond_dir / "rank.txt").write_text(format_case_study(study) + "\n")
                    summary.case_studies[f"{tag}/{condition}"] = study.to_dict()

    write_json(out / "report.json", summary.to_dict(config))
    (out / "report.txt").write_text(format_summary(summary) + "\n")
    pub.sendMessage(topics.PIPELINE_FINISHED, out_dir=str(out))
    return summary

