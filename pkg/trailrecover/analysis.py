"""
Location Network Analysis

Case-study tooling: a directed movement-count network over locations,
inverted betweenness ranking and Spearman comparison of rankings.
"""

from __future__ import annotations
import heapq
import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np
from pubsub import pub
from scipy.stats import rankdata

from . import topics
from .errors import EmptyInputError, KeyMismatchError
from .trail_model import Trail, broken_member_set

DIST_REL_TOL = 1e-12


class LocationNetwork:
    """Directed graph whose edge weight A -> B counts observed movements.

    Sentinels are never nodes. Self-loops are kept as edges.
    """

    def __init__(self, graph: Optional[nx.DiGraph] = None):
        self.graph = graph if graph is not None else nx.DiGraph()

    @classmethod
    def from_weights(cls, weights: Mapping[Tuple[str, str], int]) -> "LocationNetwork":
        graph = nx.DiGraph()
        for (a, b), w in weights.items():
            graph.add_edge(a, b, weight=w)
        return cls(graph)

    @property
    def nodes(self) -> List[str]:
        return sorted(self.graph.nodes)

    def weight(self, a: str, b: str) -> int:
        data = self.graph.get_edge_data(a, b)
        return int(data["weight"]) if data else 0

    @property
    def total_weight(self) -> int:
        return int(sum(w for _, _, w in self.graph.edges(data="weight")))

    def scaled(self, factor: float) -> "LocationNetwork":
        """Copy with every edge weight multiplied by ``factor``."""
        graph = self.graph.copy()
        for _, _, data in graph.edges(data=True):
            data["weight"] = data["weight"] * factor
        return LocationNetwork(graph)

    def __len__(self) -> int:
        return self.graph.number_of_nodes()


def build_network(trails: Iterable[Trail], skip_runs: bool = False) -> LocationNetwork:
    """Tally consecutive movements between real locations.

    With ``skip_runs`` every pair touching a record inside a broken point
    is ignored, which is the no-recovery condition.
    """
    weights: Counter = Counter()
    graph = nx.DiGraph()
    for trail in trails:
        skipped = broken_member_set(trail) if skip_runs else set()
        records = trail.records
        for record in records:
            if not record.is_sentinel:
                graph.add_node(record.location)
        for i in range(len(records) - 1):
            a, b = records[i], records[i + 1]
            if a.is_sentinel or b.is_sentinel:
                continue
            if i in skipped or i + 1 in skipped:
                continue
            weights[a.location, b.location] += 1
    for (a, b), w in weights.items():
        graph.add_edge(a, b, weight=w)
    return LocationNetwork(graph)


def _single_source(
    graph: nx.DiGraph, source: str
) -> Tuple[List[str], Dict[str, List[str]], Dict[str, float]]:
    """Dijkstra with shortest-path counting; edge length is 1/weight."""
    dist: Dict[str, float] = {source: 0.0}
    sigma: Dict[str, float] = {source: 1.0}
    preds: Dict[str, List[str]] = {source: []}
    order: List[str] = []
    settled = set()
    heap: List[Tuple[float, str]] = [(0.0, source)]

    while heap:
        d, v = heapq.heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        order.append(v)
        for w in sorted(graph.successors(v)):
            if w == v:
                continue
            alt = d + 1.0 / graph[v][w]["weight"]
            if w in settled:
                continue
            if w not in dist or (
                alt < dist[w] and not math.isclose(alt, dist[w], rel_tol=DIST_REL_TOL)
            ):
                dist[w] = alt
                sigma[w] = sigma[v]
                preds[w] = [v]
                heapq.heappush(heap, (alt, w))
            elif math.isclose(alt, dist[w], rel_tol=DIST_REL_TOL):
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, preds, sigma


def inverted_betweenness(net: LocationNetwork) -> Dict[str, float]:
    """Betweenness centrality with edge lengths 1/weight.

    Heavily travelled edges become short, so a high score marks a busy
    intermediary. Directed, unnormalised, multiple shortest paths share
    credit (Brandes accumulation); unreachable pairs contribute nothing.

    Raises:
        EmptyInputError: if the network has no nodes.
    """
    graph = net.graph
    if graph.number_of_nodes() == 0:
        raise EmptyInputError("Cannot rank an empty location network")

    scores: Dict[str, float] = {v: 0.0 for v in graph.nodes}
    for source in sorted(graph.nodes):
        order, preds, sigma = _single_source(graph, source)
        delta: Dict[str, float] = {v: 0.0 for v in order}
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != source:
                scores[w] += delta[w]
    return scores


def spearman(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """Spearman rank correlation of two per-node score maps.

    Ties get average ranks. With zero rank variance on either side the
    result is 1.0 when both maps rank identically, else 0.0.

    Raises:
        KeyMismatchError: if the node sets differ.
    """
    if a.keys() != b.keys():
        raise KeyMismatchError(a.keys() - b.keys(), b.keys() - a.keys())
    nodes = sorted(a)
    ra = rankdata([a[n] for n in nodes])
    rb = rankdata([b[n] for n in nodes])
    if len(nodes) < 2 or ra.std() == 0 or rb.std() == 0:
        return 1.0 if np.array_equal(ra, rb) else 0.0
    rho = float(np.corrcoef(ra, rb)[0, 1])
    return max(-1.0, min(1.0, rho))


@dataclass
class RankReport:
    """Locations ordered by descending inverted betweenness."""

    ranking: List[str]
    scores: Dict[str, float]
    spearman_vs: Optional[float] = None
    label: str = ""

    @classmethod
    def from_scores(cls, scores: Mapping[str, float], label: str = "") -> "RankReport":
        ranking = sorted(scores, key=lambda n: (-scores[n], n))
        return cls(ranking, dict(scores), None, label)

    def top(self, k: int) -> List[str]:
        return self.ranking[:k]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "ranking": list(self.ranking),
            "scores": {n: self.scores[n] for n in self.ranking},
            "spearman_vs": self.spearman_vs,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RankReport":
        return cls(
            ranking=list(data["ranking"]),
            scores={k: float(v) for k, v in data["scores"].items()},
            spearman_vs=data.get("spearman_vs"),
            label=data.get("label", ""),
        )


def rank_locations(
    trails: Iterable[Trail], skip_runs: bool = False, label: str = ""
) -> RankReport:
    """build_network followed by inverted_betweenness."""
    net = build_network(trails, skip_runs=skip_runs)
    report = RankReport.from_scores(inverted_betweenness(net), label)
    pub.sendMessage(topics.ANALYSIS_RANKED, n_nodes=len(net), top=report.top(5))
    return report


def compare_rankings(report: RankReport, reference: RankReport) -> RankReport:
    """Copy of ``report`` with its Spearman correlation to ``reference``.

    Nodes missing on one side score 0 there, since a location nobody
    passed through has zero betweenness.
    """
    nodes = set(report.scores) | set(reference.scores)
    a = {n: report.scores.get(n, 0.0) for n in nodes}
    b = {n: reference.scores.get(n, 0.0) for n in nodes}
    return RankReport(report.ranking, report.scores, spearman(a, b), report.label)


@dataclass
class CaseStudy:
    """Ranking under truth, recovered and no-recovery conditions."""

    truth: RankReport
    recovered: RankReport
    unrecovered: RankReport
    strategy: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "strategy": self.strategy,
            "truth": self.truth.to_dict(),
            "recovered": self.recovered.to_dict(),
            "unrecovered": self.unrecovered.to_dict(),
        }


def case_study(
    truth: Iterable[Trail],
    degraded: Iterable[Trail],
    recovered: Iterable[Trail],
    strategy: str = "",
) -> CaseStudy:
    """Rank locations on the true trails, on the recovered trails, and on
    the degraded trails with broken points ignored; correlate the latter
    two against the truth."""
    truth_rank = rank_locations(truth, label="truth")
    recovered_rank = compare_rankings(
        rank_locations(recovered, label="recovered"), truth_rank
    )
    unrecovered_rank = compare_rankings(
        rank_locations(degraded, skip_runs=True, label="unrecovered"), truth_rank
    )
    return CaseStudy(truth_rank, recovered_rank, unrecovered_rank, strategy)


def format_case_study(study: CaseStudy, top: int = 10) -> str:
    """Side-by-side table of the top ``top`` locations per condition."""
    columns = [study.truth, study.recovered, study.unrecovered]
    header = f"{'rank':>4}  " + "  ".join(f"{c.label:<14}" for c in columns)
    lines = [header, "-" * len(header)]
    for i in range(top):
        cells = [c.ranking[i] if i < len(c.ranking) else "" for c in columns]
        lines.append(f"{i + 1:>4}  " + "  ".join(f"{cell:<14}" for cell in cells))
    lines.append(
        f"spearman vs truth: recovered={study.recovered.spearman_vs:.3f} "
        f"unrecovered={study.unrecovered.spearman_vs:.3f}"
    )
    return "\n".join(lines)
