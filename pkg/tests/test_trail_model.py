"""
Unit tests for trails, interning and broken point detection.
"""

import pytest

from trailrecover.errors import InvalidTrailError, UnknownLocationError
from trailrecover.trail_model import (
    SENTINEL_BEGIN,
    SENTINEL_END,
    LocationIndex,
    RunSequence,
    TimeUnit,
    Trail,
    TrailRecord,
    broken_member_set,
    detect_broken_points,
    run_sequences,
)


@pytest.mark.unit
class TestTrail:
    """Test Trail invariants."""

    def test_rejects_empty_trail(self):
        """A trail needs at least one record."""
        with pytest.raises(InvalidTrailError):
            Trail("T1", ())

    def test_rejects_decreasing_time(self, make_trail):
        """Timestamps may repeat but never go back."""
        with pytest.raises(InvalidTrailError, match="decreases"):
            make_trail("T1", [("A", 2), ("B", 1)])

    def test_equal_times_allowed(self, make_trail):
        trail = make_trail("T1", [("A", 1), ("B", 1)])
        assert trail.times == [1, 1]

    def test_rejects_negative_and_float_time(self):
        with pytest.raises(InvalidTrailError):
            TrailRecord("A", -1)
        with pytest.raises(InvalidTrailError):
            TrailRecord("A", 1.5)

    def test_rejects_empty_location(self):
        with pytest.raises(InvalidTrailError):
            TrailRecord("", 1)

    @pytest.mark.parametrize(
        "pairs",
        [
            [(SENTINEL_BEGIN, 1), ("A", 1)],
            [("A", 1), (SENTINEL_END, 1)],
            [("A", 1), (SENTINEL_BEGIN, 1), ("B", 2)],
            [(SENTINEL_BEGIN, 1), ("A", 1), (SENTINEL_END, 1), ("B", 2), (SENTINEL_END, 2)],
            [(SENTINEL_END, 1), ("A", 1), (SENTINEL_BEGIN, 1)],
            [(SENTINEL_BEGIN, 1), (SENTINEL_END, 1)],
        ],
    )
    def test_rejects_misplaced_sentinels(self, make_trail, pairs):
        with pytest.raises(InvalidTrailError, match="reserved"):
            make_trail("T1", pairs)

    def test_accepts_augmented_trail(self, make_trail):
        trail = make_trail("T1", [(SENTINEL_BEGIN, 1), ("A", 1), (SENTINEL_END, 1)])
        assert trail.has_sentinels

    def test_with_locations_keeps_times(self, table_trail):
        """with_locations rewrites locations only."""
        locs = list(reversed(table_trail.locations))
        out = table_trail.with_locations(locs)
        assert out.locations == locs
        assert out.times == table_trail.times
        assert out.trail_id == table_trail.trail_id

    def test_base_id(self, make_trail):
        assert make_trail("T1#0", [("A", 1)], origin_id="T1").base_id == "T1"
        assert make_trail("T1", [("A", 1)]).base_id == "T1"


@pytest.mark.unit
class TestTimeUnit:
    """Test timestamp parsing."""

    def test_integer_ticks(self):
        assert TimeUnit.TICKS.parse("42") == 42
        assert TimeUnit.DAYS.parse(" 7 ") == 7

    def test_iso_date_in_days(self):
        assert TimeUnit.DAYS.parse("1970-01-11") == 10

    def test_iso_datetime_in_seconds(self):
        assert TimeUnit.SECONDS.parse("1970-01-01T00:01:00") == 60

    def test_ticks_reject_dates(self):
        with pytest.raises(ValueError):
            TimeUnit.TICKS.parse("2020-01-01")


@pytest.mark.unit
class TestLocationIndex:
    """Test location interning."""

    def test_sentinels_first(self):
        index = LocationIndex()
        assert index.index(SENTINEL_BEGIN) == 0
        assert index.index(SENTINEL_END) == 1

    def test_first_seen_order_and_bijection(self):
        index = LocationIndex(["B", "A", "B"])
        assert index.tokens == [SENTINEL_BEGIN, SENTINEL_END, "B", "A"]
        for i, token in enumerate(index.tokens):
            assert index.index(token) == i
            assert index.token(i) == token

    def test_unknown_location(self):
        with pytest.raises(UnknownLocationError):
            LocationIndex().index("X")


@pytest.mark.unit
class TestDetectBrokenPoints:
    """Test broken point and run detection."""

    def test_continuous_run(self, table_trail):
        """{B,C}@3 then {C,D}@4 form one run between B@2 and E@5."""
        runs = detect_broken_points(table_trail)

        assert len(runs) == 1
        run = runs[0]
        assert run.slot_times == [3, 4]
        assert run.layer_tokens(table_trail) == [["B", "C"], ["C", "D"]]
        assert run.source == "B"
        assert run.target == "E"
        assert run.source_index == 1
        assert run.target_index == 6
        assert run.size == 4

    def test_unbroken_trail(self, make_trail):
        assert detect_broken_points(make_trail("T", [("A", 1), ("B", 2), ("C", 3)])) == []

    def test_boundary_run_uses_sentinels(self, make_trail):
        runs = detect_broken_points(make_trail("T", [("A", 1), ("B", 1)]))
        assert len(runs) == 1
        assert runs[0].source == SENTINEL_BEGIN
        assert runs[0].target == SENTINEL_END

    def test_same_location_slot_is_not_broken(self, make_trail):
        """A slot with only one distinct location is not a broken point."""
        trail = make_trail("T", [("A", 1), ("A", 1), ("B", 2)])
        assert detect_broken_points(trail) == []

    def test_duplicates_kept_as_members(self, make_trail):
        trail = make_trail("T", [("X", 0), ("A", 1), ("A", 1), ("B", 1), ("Y", 2)])
        runs = detect_broken_points(trail)
        assert runs[0].layer_tokens(trail) == [["A", "A", "B"]]

    def test_two_disjoint_runs(self, make_trail):
        trail = make_trail(
            "T", [("A", 1), ("B", 1), ("C", 2), ("D", 3), ("E", 3), ("F", 4)]
        )
        runs = detect_broken_points(trail)
        assert [r.slot_times for r in runs] == [[1], [3]]
        assert runs[0].target == "C"
        assert runs[1].source == "C"

    def test_sentinels_never_join_a_slot(self, make_trail):
        trail = make_trail(
            "T",
            [(SENTINEL_BEGIN, 1), ("A", 1), ("B", 1), ("C", 2), (SENTINEL_END, 2)],
        )
        runs = detect_broken_points(trail)
        assert len(runs) == 1
        assert runs[0].members == [1, 2]
        assert runs[0].source == SENTINEL_BEGIN
        assert runs[0].source_index == 0

    def test_members_partition_records(self, table_trail):
        """Each record index belongs to at most one run."""
        members = [m for run in detect_broken_points(table_trail) for m in run.members]
        assert len(members) == len(set(members))
        assert broken_member_set(table_trail) == {2, 3, 4, 5}

    def test_idempotent(self, table_trail):
        assert detect_broken_points(table_trail) == detect_broken_points(table_trail)


@pytest.mark.unit
class TestRunSequences:
    """Test RunSequence extraction."""

    def test_reads_truth_locations(self, make_trail):
        original = make_trail("T", [("A", 1), ("B", 2), ("C", 3)])
        degraded = make_trail("T", [("A", 1), ("C", 1), ("B", 1)])

        runs = run_sequences(degraded, truth=original)

        assert runs == [RunSequence("T", 0, (1,), (("A", "B", "C"),))]
        assert runs[0].key == "T/0"

    def test_keys_use_base_id(self, make_trail):
        trail = make_trail("T#1", [("A", 5), ("B", 5)], origin_id="T")
        assert run_sequences(trail)[0].trail_id == "T"

    def test_length_mismatch(self, make_trail):
        with pytest.raises(InvalidTrailError):
            run_sequences(make_trail("T", [("A", 1)]), truth=make_trail("T", [("A", 1), ("B", 2)]))

    def test_dict_round_trip(self):
        run = RunSequence("T", 2, (3, 4), (("B", "C"), ("C", "D")))
        assert RunSequence.from_dict(run.to_dict()) == run
