"""
Shared pytest fixtures for trailrecover tests.
"""

import pytest
from pubsub import pub

from trailrecover.trail_model import Trail
from trailrecover.transition import TransitionNetwork


@pytest.fixture(autouse=True)
def clean_bus():
    """Drop every listener a test subscribed to the event bus."""
    yield
    pub.unsubAll()


@pytest.fixture
def make_trail():
    """Factory fixture: make_trail("T1", [("A", 1), ("B", 2)])."""

    def _make(trail_id, pairs, origin_id=None):
        return Trail.from_pairs(trail_id, pairs, origin_id)

    return _make


@pytest.fixture
def table_trail(make_trail):
    """Trail with one continuous broken point: {B,C}@3 then {C,D}@4."""
    return make_trail(
        "T1",
        [("A", 1), ("B", 2), ("B", 3), ("C", 3), ("C", 4), ("D", 4), ("E", 5)],
    )


@pytest.fixture
def abcd_net():
    """Network where A,B,C,D is the best order through {B,C}."""
    return TransitionNetwork.from_counts(
        ["A", "B", "C", "D"],
        {
            ("A", "B"): 9,
            ("A", "C"): 1,
            ("B", "C"): 8,
            ("B", "D"): 2,
            ("C", "B"): 2,
            ("C", "D"): 2,
        },
    )


@pytest.fixture
def events():
    """Record every event published while the test runs."""
    seen = []

    def listener(topic=pub.AUTO_TOPIC, **kwargs):
        seen.append((topic.getName(), kwargs))

    pub.subscribe(listener, pub.ALL_TOPICS)
    yield seen
