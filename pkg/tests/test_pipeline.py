"""
Integration tests for the end-to-end pipeline.
"""

import json

import numpy as np
import pytest

from trailrecover import topics
from trailrecover.config import PipelineConfig
from trailrecover.degrade import DegradeSpec
from trailrecover.errors import PhaseError
from trailrecover.formats import (
    load_answers,
    load_results,
    read_trails_csv,
    write_trails_csv,
)
from trailrecover.metrics import evaluate
from trailrecover.pipeline import phase, run_pipeline
from trailrecover.solvers import AcsParams
from trailrecover.synth import GeneratorSpec, generate
from trailrecover.trail_model import TrailRecord


def small_config(**overrides):
    values = dict(
        generator=GeneratorSpec(n_locations=6, n_trails=15, min_length=8, max_length=14),
        acs=AcsParams(ants=3, iterations=5),
    )
    values.update(overrides)
    return PipelineConfig(**values)


@pytest.mark.integration
class TestRunPipeline:
    """Test full pipeline runs on small synthetic data."""

    def test_artifacts(self, tmp_path):
        summary = run_pipeline(small_config(), tmp_path)
        cond = tmp_path / "mut2" / "main"

        for name in ["config.json", "hidden.json", "trails.csv", "report.json", "report.txt"]:
            assert (tmp_path / name).exists(), name
        assert (tmp_path / "mut2" / "degraded.csv").exists()
        assert (tmp_path / "mut2" / "answers.json").exists()
        for name in ["preprocessed.csv", "net.json", "rank.json", "rank.txt"]:
            assert (cond / name).exists(), name
        for strategy in ["exact", "acs", "greedy", "random"]:
            assert (cond / f"recovered_{strategy}.csv").exists()
            assert (cond / f"results_{strategy}.json").exists()
            assert (cond / f"report_{strategy}.json").exists()

        assert [row.strategy for row in summary.rows] == ["exact", "acs", "greedy", "random"]
        assert all(0.0 <= row.accuracy <= 1.0 for row in summary.rows)
        assert "mut2/main" in summary.case_studies

    def test_deterministic(self, tmp_path):
        """Two runs with the same config write identical reports."""
        config = small_config(replicates=2)
        run_pipeline(config, tmp_path / "a")
        run_pipeline(config, tmp_path / "b")

        for rel in ["report.json", "report.txt", "mut2/main/results_acs.json"]:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_exact_is_best(self, tmp_path):
        """Exact never scores below greedy on any run."""
        run_pipeline(small_config(), tmp_path)
        cond = tmp_path / "mut2" / "main"
        exact, _ = load_results(cond / "results_exact.json")
        greedy, _ = load_results(cond / "results_greedy.json")
        for e, g in zip(exact, greedy):
            assert (e.trail_id, e.run_index) == (g.trail_id, g.run_index)
            assert e.log_prob >= g.log_prob - 1e-9

    def test_artifacts_chain_manually(self, tmp_path):
        """Saved answers and results re-evaluate to the saved report."""
        run_pipeline(small_config(), tmp_path)
        answers = load_answers(tmp_path / "mut2" / "answers.json")
        _, recovered = load_results(tmp_path / "mut2" / "main" / "results_greedy.json")
        saved = json.loads((tmp_path / "mut2" / "main" / "report_greedy.json").read_text())
        assert evaluate(answers, recovered).to_dict() == saved

    def test_ablation_and_sweep(self, tmp_path):
        config = small_config(strategies=["greedy"], ablation=True, sweep=[2, 3])
        summary = run_pipeline(config, tmp_path)

        assert [(r.sweep, r.condition) for r in summary.rows] == [
            ("mut2", "neither"),
            ("mut2", "sentinels"),
            ("mut2", "full"),
            ("mut3", "neither"),
            ("mut3", "sentinels"),
            ("mut3", "full"),
        ]
        assert (tmp_path / "mut3" / "full" / "rank.json").exists()
        assert not (tmp_path / "mut3" / "neither" / "rank.json").exists()

    def test_over_budget_reported_as_na(self, tmp_path):
        config = small_config(
            strategies=["exact", "greedy"], degrade=DegradeSpec(v=4), exact_budget=10
        )
        summary = run_pipeline(config, tmp_path)

        exact = summary.rows[0]
        assert exact.over_budget
        assert exact.accuracy is None
        assert summary.rows[1].accuracy is not None
        assert "N/A" in (tmp_path / "report.txt").read_text()
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["rows"][0]["accuracy"] is None

    def test_exact_fallback(self, tmp_path, events):
        config = small_config(
            strategies=["exact"],
            degrade=DegradeSpec(v=4),
            exact_budget=10,
            exact_fallback=True,
        )
        summary = run_pipeline(config, tmp_path)
        assert summary.rows[0].accuracy is not None
        assert topics.SOLVER_BUDGET_FALLBACK in [name for name, _ in events]

    def test_real_input(self, tmp_path):
        trails = generate(GeneratorSpec(n_locations=5, n_trails=10, seed=1)).trails
        source = tmp_path / "in.csv"
        write_trails_csv(source, trails)

        config = small_config(input=str(source), strategies=["greedy"])
        run_pipeline(config, tmp_path / "out")

        assert not (tmp_path / "out" / "hidden.json").exists()
        assert read_trails_csv(tmp_path / "out" / "trails.csv") == trails

    def test_missing_input_is_phase_error(self, tmp_path, events):
        config = small_config(input=str(tmp_path / "missing.csv"))
        with pytest.raises(PhaseError) as info:
            run_pipeline(config, tmp_path / "out")
        assert info.value.phase == "ingest"
        assert info.value.exit_code == 2
        assert (topics.PIPELINE_PHASE_STARTED, {"phase": "ingest"}) in events


@pytest.mark.unit
class TestPhase:
    def test_wraps_failures(self):
        with pytest.raises(PhaseError, match=r"\[extract\]"):
            with phase("extract"):
                raise RuntimeError("boom")

    def test_publishes_finish(self, events):
        with phase("synth"):
            pass
        finished = [kw for name, kw in events if name == topics.PIPELINE_PHASE_FINISHED]
        assert finished[0]["phase"] == "synth"


def retimed(trails, seed):
    """Copies of ``trails`` with 1 to 6 ticks between consecutive records."""
    rng = np.random.default_rng(seed)
    out = []
    for trail in trails:
        times = np.cumsum(rng.integers(1, 7, size=len(trail)))
        out.append(
            trail.with_records(
                TrailRecord(r.location, int(t)) for r, t in zip(trail.records, times)
            )
        )
    return out


def accuracies(summary):
    return {(row.sweep, row.condition, row.strategy): row.accuracy for row in summary.rows}


@pytest.mark.integration
class TestAccuracyTrends:
    """Accuracy patterns on scaled-down synthetic benchmarks."""

    def test_solver_ordering(self, tmp_path):
        config = PipelineConfig(
            generator=GeneratorSpec(
                n_locations=30, n_trails=600, min_length=10, max_length=20, concentration=4.0
            ),
            acs=AcsParams(ants=5, iterations=30),
            sweep=[2, 4],
            rank=False,
        )
        acc = accuracies(run_pipeline(config, tmp_path))

        for v, chance in [(2, 1 / 2), (4, 1 / 24)]:
            exact, acs, greedy, rand = (
                acc[f"mut{v}", "main", name] for name in ["exact", "acs", "greedy", "random"]
            )
            assert exact >= greedy - 0.02
            assert acs >= greedy - 0.02
            assert min(exact, acs, greedy) > rand
            assert rand == pytest.approx(chance, abs=0.05)
        assert acc["mut2", "main", "exact"] > acc["mut4", "main", "exact"]

    def test_accuracy_falls_with_resolution(self, tmp_path):
        """Coarser slots never help, bar one noisy step."""
        trails = generate(
            GeneratorSpec(
                n_locations=20, n_trails=800, min_length=10, max_length=14, concentration=4.0
            )
        ).trails
        source = tmp_path / "in.csv"
        write_trails_csv(source, retimed(trails, seed=5))
        resolutions = list(range(2, 10))

        config = PipelineConfig(
            input=str(source),
            degrade=DegradeSpec(strategy="resolution"),
            sweep=resolutions,
            strategies=["exact"],
            exact_budget=10**5,
            exact_fallback=True,
            acs=AcsParams(ants=5, iterations=30),
            rank=False,
        )
        acc = accuracies(run_pipeline(config, tmp_path / "out"))
        curve = [acc[f"res{r}", "main", "exact"] for r in resolutions]

        steps = [b <= a for a, b in zip(curve, curve[1:])]
        assert sum(steps) >= len(steps) - 1
        assert curve[0] > curve[-1]

    def test_sentinels_and_partitioning_help(self, tmp_path):
        """Gaps restart the hidden chain, so cut parts are best read from BEGIN."""
        config = PipelineConfig(
            generator=GeneratorSpec(
                n_locations=30,
                n_trails=1000,
                min_length=6,
                max_length=10,
                concentration=4.0,
                begin_concentration=3.0,
                gap_rate=0.15,
            ),
            degrade=DegradeSpec(v=3),
            strategies=["exact"],
            ablation=True,
            rank=False,
        )
        acc = accuracies(run_pipeline(config, tmp_path))
        neither, sentinels, full = (
            acc["mut3", condition, "exact"] for condition in ["neither", "sentinels", "full"]
        )

        assert full > neither
        assert full >= sentinels - 0.01
        assert sentinels >= neither - 0.01
