"""
Unit tests for synthetic trail generation.
"""

import numpy as np
import pytest

from trailrecover import topics
from trailrecover.errors import ConfigError
from trailrecover.synth import (
    GeneratorSpec,
    empirical_transition_matrix,
    generate,
    location_names,
)
from trailrecover.trail_model import detect_broken_points


@pytest.mark.unit
class TestGeneratorSpec:
    def test_validation(self):
        with pytest.raises(ConfigError):
            GeneratorSpec(n_locations=1)
        with pytest.raises(ConfigError):
            GeneratorSpec(min_length=10, max_length=5)
        with pytest.raises(ConfigError):
            GeneratorSpec(gap_rate=1.0)

    def test_location_names(self):
        assert location_names(3) == ["L0", "L1", "L2"]
        assert location_names(50)[:2] == ["L00", "L01"]


@pytest.mark.unit
class TestGenerate:
    """Test sampled datasets."""

    def test_deterministic_for_seed(self):
        spec = GeneratorSpec(n_locations=6, n_trails=20, seed=3)
        a, b = generate(spec), generate(spec)
        assert a.trails == b.trails
        assert np.array_equal(a.matrix, b.matrix)

    def test_trails_are_unbroken(self, events):
        spec = GeneratorSpec(n_locations=8, n_trails=50, min_length=5, max_length=12)
        dataset = generate(spec)

        assert len(dataset.trails) == 50
        for trail in dataset.trails:
            assert 5 <= len(trail) <= 12
            assert trail.times == list(range(len(trail)))
            assert detect_broken_points(trail) == []
        assert (topics.SYNTH_GENERATED, {"n_trails": 50, "n_locations": 8}) in events

    def test_hidden_model_is_stochastic(self):
        dataset = generate(GeneratorSpec(n_locations=5, n_trails=1))
        assert dataset.matrix.sum(axis=1) == pytest.approx(np.ones(5))
        assert dataset.begin.sum() == pytest.approx(1.0)
        assert set(dataset.hidden_dict()) == {"locations", "matrix", "begin", "end"}

    def test_empirical_matrix_converges(self):
        spec = GeneratorSpec(
            n_locations=5,
            n_trails=2000,
            min_length=20,
            max_length=40,
            concentration=1.0,
            seed=11,
        )
        dataset = generate(spec)
        empirical = empirical_transition_matrix(dataset.trails, dataset.locations)
        assert np.abs(empirical - dataset.matrix).max() < 0.06

    def test_gaps(self):
        spec = GeneratorSpec(n_locations=5, n_trails=30, gap_rate=0.3, gap_magnitude=60)
        deltas = {
            b - a
            for trail in generate(spec).trails
            for a, b in zip(trail.times, trail.times[1:])
        }
        assert deltas == {1, 61}
