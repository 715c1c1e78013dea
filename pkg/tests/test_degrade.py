"""
Unit tests for benchmark degradation.
"""

import pytest

from trailrecover import topics
from trailrecover.degrade import (
    DegradeSpec,
    DegradeStrategy,
    collapse_resolution,
    degrade_trails,
    mutate_order,
    resolution_answers,
)
from trailrecover.errors import ConfigError, InvalidTrailError
from trailrecover.preprocess import add_sentinels
from trailrecover.trail_model import SENTINEL_BEGIN, SENTINEL_END, detect_broken_points


@pytest.fixture
def long_trail(make_trail):
    """Twenty distinct locations, one per tick."""
    return make_trail("T", [(f"L{i:02d}", i) for i in range(20)])


@pytest.mark.unit
class TestDegradeSpec:
    def test_string_strategy(self):
        spec = DegradeSpec(strategy="resolution", resolution=3)
        assert spec.strategy is DegradeStrategy.RESOLUTION
        assert spec.tag == "res3"
        assert DegradeSpec(v=4).tag == "mut4"

    def test_unknown_strategy(self):
        with pytest.raises(ConfigError):
            DegradeSpec(strategy="scramble")

    def test_validation(self):
        with pytest.raises(ConfigError):
            DegradeSpec(v=1)
        with pytest.raises(ConfigError):
            DegradeSpec(mutation_fraction=0.0)
        with pytest.raises(ConfigError):
            DegradeSpec(strategy=DegradeStrategy.RESOLUTION, resolution=1)


@pytest.mark.unit
class TestResolution:
    """Test timestamp coarsening."""

    def test_floor_to_resolution(self, make_trail):
        trail = make_trail("T", [("A", 0), ("B", 1), ("C", 2), ("D", 3), ("E", 5)])
        assert collapse_resolution(trail, 2).times == [0, 0, 2, 2, 4]

    def test_resolution_one_is_identity(self, long_trail):
        assert collapse_resolution(long_trail, 1) == long_trail

    def test_answers_keep_stored_order(self, make_trail):
        trail = make_trail("T", [("A", 0), ("B", 1), ("C", 2)])
        degraded, answers = resolution_answers(trail, 2)

        assert degraded.locations == ["A", "B", "C"]
        assert len(answers) == 1
        assert answers[0].key == "T/0"
        assert answers[0].layers == (("A", "B"),)


@pytest.mark.unit
class TestMutation:
    """Test window mutation."""

    def test_window_count(self, long_trail):
        """20 records at 20% with v=2 give two size-2 broken points."""
        degraded, answers = mutate_order(long_trail, v=2, fraction=0.2, seed=1)
        layers = [layer for run in answers for layer in run.layers]

        assert len(layers) == 2
        assert all(len(layer) == 2 for layer in layers)
        assert sum(run.size for run in detect_broken_points(degraded)) == 4

    def test_preserves_multiset_and_times_order(self, long_trail):
        for seed in range(20):
            degraded, _ = mutate_order(long_trail, v=3, fraction=0.5, seed=seed)
            assert sorted(degraded.locations) == sorted(long_trail.locations)
            assert degraded.times == sorted(degraded.times)

    def test_answers_hold_true_order(self, long_trail):
        """Each answer layer is a consecutive stretch of the original."""
        original = long_trail.locations
        _, answers = mutate_order(long_trail, v=3, fraction=0.5, seed=4)
        for run in answers:
            for layer in run.layers:
                start = original.index(layer[0])
                assert list(layer) == original[start : start + 3]

    def test_deterministic_for_seed(self, long_trail):
        assert mutate_order(long_trail, 2, seed=9) == mutate_order(long_trail, 2, seed=9)

    def test_never_touches_sentinels(self, long_trail):
        framed = add_sentinels(long_trail)
        for seed in range(10):
            degraded, _ = mutate_order(framed, v=4, fraction=1.0, seed=seed)
            assert degraded.records[0].location == SENTINEL_BEGIN
            assert degraded.records[-1].location == SENTINEL_END

    def test_too_short(self, make_trail):
        with pytest.raises(InvalidTrailError):
            mutate_order(make_trail("T", [("A", 1)]), v=2)


@pytest.mark.unit
class TestDegradeTrails:
    """Test degrading whole trail sets."""

    def test_short_trails_pass_through(self, make_trail, long_trail, events):
        short = make_trail("S", [("A", 1)])
        degraded, answers = degrade_trails([long_trail, short], DegradeSpec(v=2))

        assert degraded[1] == short
        assert {run.trail_id for run in answers} == {"T"}
        applied = [kw for name, kw in events if name == topics.DEGRADE_APPLIED]
        assert applied == [{"strategy": "mutation", "n_trails": 2, "n_runs": len(answers)}]

    def test_resolution_strategy(self, make_trail):
        trails = [make_trail("T", [("A", 0), ("B", 1), ("C", 2), ("D", 3)])]
        degraded, answers = degrade_trails(
            trails, DegradeSpec(strategy=DegradeStrategy.RESOLUTION, resolution=2)
        )
        assert degraded[0].times == [0, 0, 2, 2]
        assert [run.layers for run in answers] == [(("A", "B"), ("C", "D"))]

    def test_per_trail_seeds_differ(self, make_trail):
        trails = [
            make_trail(f"T{i}", [(f"L{j:02d}", j) for j in range(30)]) for i in range(4)
        ]
        degraded, _ = degrade_trails(trails, DegradeSpec(v=2, seed=5))
        assert len({tuple(t.times) for t in degraded}) > 1
