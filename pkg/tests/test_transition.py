"""
Unit tests for transition network extraction and scoring.
"""

import math

import numpy as np
import pytest

from trailrecover import topics
from trailrecover.errors import (
    ConfigError,
    EmptyInputError,
    InvalidInputError,
    UnknownLocationError,
)
from trailrecover.preprocess import add_sentinels
from trailrecover.trail_model import SENTINEL_BEGIN, SENTINEL_END
from trailrecover.transition import (
    SmoothingMode,
    SmoothingPolicy,
    TransitionNetwork,
    extract,
    neg_log_distance,
    score_sequence,
    unbroken_pairs,
)


def _seq(trail_id, locations, make_trail):
    return make_trail(trail_id, [(loc, t) for t, loc in enumerate(locations)])


@pytest.mark.unit
class TestExtract:
    """Test probability estimation from unbroken pairs."""

    def test_pair_tally(self, make_trail):
        trails = [_seq("T1", "BABC", make_trail), _seq("T2", "BC", make_trail)]
        net = extract(trails)

        assert net.prob("B", "C") == pytest.approx(2 / 3)
        assert net.prob("B", "A") == pytest.approx(1 / 3)
        assert net.prob("A", "B") == 1.0

    def test_single_pair(self, make_trail):
        net = extract([_seq("T", "AB", make_trail)])
        assert net.prob("A", "B") == 1.0

    def test_repeat_visits(self, make_trail):
        net = extract([_seq("T", "ABBCCDE", make_trail)])
        assert net.prob("B", "B") == 0.5
        assert net.prob("B", "C") == 0.5

    def test_pairs_touching_broken_points_are_skipped(self, table_trail):
        """Only A->B lies outside the broken run."""
        assert list(unbroken_pairs(table_trail)) == [("A", "B")]
        net = extract([table_trail])
        assert int(net.counts.sum()) == 1
        # locations seen only inside broken points are still interned
        assert "D" in net.index
        assert net.out_totals[net.index.index("D")] == 0

    def test_sentinel_edges(self, make_trail):
        net = extract([add_sentinels(_seq("T", "AB", make_trail))])
        assert net.prob(SENTINEL_BEGIN, "A") == 1.0
        assert net.prob("B", SENTINEL_END) == 1.0
        assert net.out_totals[net.index.index(SENTINEL_END)] == 0
        assert net.counts[:, net.index.index(SENTINEL_BEGIN)].sum() == 0

    def test_rows_are_stochastic(self, make_trail):
        trails = [_seq(f"T{i}", s, make_trail) for i, s in enumerate(["ABCA", "CBA", "AACB"])]
        net = extract([add_sentinels(t) for t in trails])
        rows = net.probs.sum(axis=1)
        for total, row_sum in zip(net.out_totals, rows):
            if total > 0:
                assert row_sum == pytest.approx(1.0, abs=1e-9)
        assert np.array_equal(net.counts.sum(axis=1), net.out_totals)

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            extract([])

    def test_publishes_event(self, make_trail, events):
        extract([_seq("T", "AB", make_trail)])
        names = [name for name, _ in events]
        assert topics.TRANSITION_EXTRACTED in names


@pytest.mark.unit
class TestDistances:
    """Test negative-log distances."""

    def test_certain_edge_costs_zero(self, make_trail):
        net = extract([_seq("T", "AB", make_trail)])
        assert neg_log_distance(net, "A", "B") == 0.0

    def test_forbidden_edge_is_infinite(self, make_trail):
        net = extract([_seq("T", "AB", make_trail)])
        assert neg_log_distance(net, "B", "A") == math.inf

    def test_half(self):
        net = TransitionNetwork.from_counts(["A", "B", "C"], {("A", "B"): 1, ("A", "C"): 1})
        assert neg_log_distance(net, "A", "B") == pytest.approx(math.log(2))

    def test_floor_smoothing(self, make_trail):
        net = extract(
            [_seq("T", "AB", make_trail)], SmoothingPolicy(SmoothingMode.FLOOR, 1e-6)
        )
        assert neg_log_distance(net, "B", "A") == pytest.approx(-math.log(1e-6))
        # the unsmoothed probability is untouched
        assert net.prob("B", "A") == 0.0

    def test_floor_must_be_below_observed(self):
        with pytest.raises(ConfigError):
            TransitionNetwork.from_counts(
                ["A", "B", "C"],
                {("A", "B"): 1, ("A", "C"): 1},
                SmoothingPolicy(SmoothingMode.FLOOR, 0.6),
            )

    def test_unknown_location(self, make_trail):
        net = extract([_seq("T", "AB", make_trail)])
        with pytest.raises(UnknownLocationError):
            neg_log_distance(net, "A", "Z")


@pytest.mark.unit
class TestScoreSequence:
    """Test sequence scoring."""

    def test_product_of_ones(self, make_trail):
        net = extract([add_sentinels(_seq("T", "A", make_trail))])
        assert score_sequence(net, [SENTINEL_BEGIN, "A", SENTINEL_END]) == 0.0

    def test_forbidden_edge(self, make_trail):
        net = extract([_seq("T", "AB", make_trail)])
        assert score_sequence(net, ["B", "A"]) == -math.inf

    def test_too_short(self, make_trail):
        net = extract([_seq("T", "AB", make_trail)])
        with pytest.raises(InvalidInputError):
            score_sequence(net, ["A"])

    def test_equal_transition_multisets_tie(self):
        """ABAACA and ACAABA use the same transitions, so they score alike."""
        rng = np.random.default_rng(7)
        for _ in range(1000):
            counts = rng.integers(1, 50, size=(3, 3))
            pairs = {(a, b): int(counts[i, j]) for i, a in enumerate("ABC") for j, b in enumerate("ABC")}
            net = TransitionNetwork.from_counts(["A", "B", "C"], pairs)
            assert score_sequence(net, list("ABAACA")) == pytest.approx(
                score_sequence(net, list("ACAABA")), abs=1e-12
            )

    def test_monotone_in_distance(self, make_trail):
        net = extract([_seq("T1", "ABCAB", make_trail), _seq("T2", "ACB", make_trail)])
        s1, s2 = list("ABC"), list("ACB")
        d1 = sum(neg_log_distance(net, a, b) for a, b in zip(s1, s1[1:]))
        d2 = sum(neg_log_distance(net, a, b) for a, b in zip(s2, s2[1:]))
        assert (score_sequence(net, s1) > score_sequence(net, s2)) == (d1 < d2)


@pytest.mark.unit
class TestNetworkOps:
    """Test merging and serialisation."""

    def test_merge_sums_counts(self, make_trail):
        a = extract([_seq("T1", "AB", make_trail)])
        b = extract([_seq("T2", "ABC", make_trail)])
        merged = a.merge(b)
        assert merged.prob("A", "B") == 1.0
        assert dict(((x, y), c) for x, y, c in merged.pair_counts()) == {
            ("A", "B"): 2,
            ("B", "C"): 1,
        }

    def test_dict_round_trip(self, make_trail):
        net = extract([add_sentinels(_seq("T", "ABCA", make_trail))], metadata={"unit": "days"})
        back = TransitionNetwork.from_dict(net.to_dict())
        assert back.index == net.index
        assert np.array_equal(back.counts, net.counts)
        assert back.metadata == {"unit": "days"}

    def test_malformed_dict(self):
        with pytest.raises(InvalidInputError):
            TransitionNetwork.from_dict({"counts": []})

    def test_successors(self, make_trail):
        net = extract([_seq("T", "ABAC", make_trail)])
        assert net.successors("A") == {"B": 0.5, "C": 0.5}

    def test_arrays_are_read_only(self, make_trail):
        net = extract([_seq("T", "AB", make_trail)])
        with pytest.raises(ValueError):
            net.probs[0, 0] = 1.0
