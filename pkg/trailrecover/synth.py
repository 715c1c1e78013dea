"""
Synthetic Trails

Samples unbroken ground-truth trails from a hidden first-order Markov
chain, for benchmarks that need a known transition model.
"""

from __future__ import annotations
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
from pubsub import pub
from scipy.special import softmax

from . import topics
from .errors import ConfigError
from .trail_model import Trail, TrailRecord


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape of a synthetic dataset.

    ``concentration`` scales the random logits of every transition row:
    large values give near-deterministic chains, values near zero give
    uniform transitions. ``begin_concentration`` does the same for the
    entry and exit distributions. Before each record after the first, a
    gap of ``gap_magnitude`` extra ticks is injected with probability
    ``gap_rate`` and the chain restarts from the entry distribution.
    """

    n_locations: int = 50
    n_trails: int = 500
    min_length: int = 10
    max_length: int = 40
    concentration: float = 3.0
    begin_concentration: float = 1.0
    gap_rate: float = 0.0
    gap_magnitude: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.n_locations < 2:
            raise ConfigError(f"n_locations must be >= 2, got {self.n_locations}")
        if self.n_trails < 1:
            raise ConfigError(f"n_trails must be >= 1, got {self.n_trails}")
        if self.min_length < 2:
            raise ConfigError(f"min_length must be >= 2, got {self.min_length}")
        if self.max_length < self.min_length:
            raise ConfigError(
                f"max_length {self.max_length} is below min_length {self.min_length}"
            )
        if not self.concentration > 0:
            raise ConfigError(f"concentration must be > 0, got {self.concentration}")
        if self.begin_concentration < 0:
            raise ConfigError(
                f"begin_concentration must be >= 0, got {self.begin_concentration}"
            )
        if not 0.0 <= self.gap_rate < 1.0:
            raise ConfigError(f"gap_rate must be in [0, 1), got {self.gap_rate}")
        if self.gap_magnitude < 1:
            raise ConfigError(f"gap_magnitude must be >= 1, got {self.gap_magnitude}")


@dataclass
class SyntheticDataset:
    """Generated trails together with the model that produced them."""

    trails: List[Trail]
    locations: List[str]
    matrix: np.ndarray
    begin: np.ndarray
    end: np.ndarray
    spec: GeneratorSpec

    def hidden_dict(self) -> Dict[str, Any]:
        """The hidden model as JSON-ready data."""
        return {
            "locations": list(self.locations),
            "matrix": self.matrix.tolist(),
            "begin": self.begin.tolist(),
            "end": self.end.tolist(),
        }


def location_names(n: int) -> List[str]:
    width = len(str(n - 1))
    return [f"L{i:0{width}d}" for i in range(n)]


def _trail_ids(n: int) -> List[str]:
    width = max(4, len(str(n - 1)))
    return [f"T{i:0{width}d}" for i in range(n)]


def generate(spec: GeneratorSpec) -> SyntheticDataset:
    """Sample a hidden model and ``spec.n_trails`` trails from it.

    Timestamps advance one tick per record, so generated trails are
    unbroken. The last location of each trail is drawn from the row of
    its predecessor reweighted by the exit distribution, which gives the
    END sentinel something to learn.
    """
    rng = np.random.default_rng(spec.seed)
    k = spec.n_locations
    matrix = softmax(spec.concentration * rng.standard_normal((k, k)), axis=1)
    begin = softmax(spec.begin_concentration * rng.standard_normal(k))
    end = softmax(spec.begin_concentration * rng.standard_normal(k))
    names = location_names(k)

    trails: List[Trail] = []
    for trail_id in _trail_ids(spec.n_trails):
        length = int(rng.integers(spec.min_length, spec.max_length + 1))
        t = 0
        state = int(rng.choice(k, p=begin))
        records = [TrailRecord(names[state], t)]
        for step in range(1, length):
            t += 1
            if spec.gap_rate > 0 and rng.random() < spec.gap_rate:
                t += spec.gap_magnitude
                state = int(rng.choice(k, p=begin))
            else:
                p = matrix[state]
                if step == length - 1:
                    p = p * end
                    p = p / p.sum()
                state = int(rng.choice(k, p=p))
            records.append(TrailRecord(names[state], t))
        trails.append(Trail(trail_id, tuple(records)))

    pub.sendMessage(topics.SYNTH_GENERATED, n_trails=len(trails), n_locations=k)
    return SyntheticDataset(trails, names, matrix, begin, end, spec)


def empirical_transition_matrix(
    trails: Iterable[Trail], locations: Sequence[str]
) -> np.ndarray:
    """Row-normalised transition frequencies between one-tick neighbours.

    Pairs across an injected gap and the exit-weighted final step are
    left out, so rows converge to the hidden matrix. Rows with no
    observations are zero.
    """
    index = {loc: i for i, loc in enumerate(locations)}
    counts = np.zeros((len(locations), len(locations)))
    for trail in trails:
        records = trail.records
        for a, b in zip(records[:-2], records[1:-1]):
            if b.time - a.time == 1:
                counts[index[a.location], index[b.location]] += 1
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
