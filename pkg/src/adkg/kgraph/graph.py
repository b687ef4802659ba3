"""Knowledge graph types and construction from feature statistics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from adkg.errors import DataError, GraphError
from adkg.ingest import Modality
from adkg.stats.tables import CorrelationEntry, FeatureStat, Thresholds, passes_effect

LOGGER = logging.getLogger(__name__)

NODE_TYPES = ("imaging", "molecular", "clinical", "genetic", "eeg")
CATEGORIES = ("correlated", "expression_related", "volume_associated", "risk_factor")
SOURCES = ("pearson_r", "cohens_d", "odds_ratio")

NODE_TYPE_OF = {
    Modality.MRI: "imaging",
    Modality.EEG: "eeg",
    Modality.BIOMARKER: "molecular",
    Modality.CLINICAL: "clinical",
    Modality.GENE_EXPRESSION: "genetic",
}


@dataclass(frozen=True)
class KgNode:
    id: str
    node_type: str
    modality: Modality
    effect: float
    p_adj: float
    attrs: Mapping[str, str] = field(default_factory=dict)
    test: str = ""


@dataclass(frozen=True)
class KgEdge:
    a: str
    b: str
    category: str
    weight: float
    source: str
    value: float = math.nan  # signed r, d or OR behind the weight

    def __post_init__(self):
        if self.a == self.b:
            raise GraphError(f"self-loop on {self.a!r}")
        if not 0.0 < self.weight <= 1.0:
            raise GraphError(f"edge weight {self.weight} outside (0, 1]")
        if self.category not in CATEGORIES:
            raise GraphError(f"unknown edge category {self.category!r}")
        if self.source not in SOURCES:
            raise GraphError(f"unknown edge source {self.source!r}")

    @property
    def pair(self) -> tuple:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


class KnowledgeGraph:
    """Undirected graph of typed nodes and categorized, weighted edges.

    Edges are stored once per (unordered pair, category). Analytics work on
    the collapsed simple graph where a pair's weight is its heaviest edge.
    """

    def __init__(self, nodes: Iterable[KgNode] = (), edges: Iterable[KgEdge] = ()):
        self._nodes = {}
        for n in nodes:
            if n.id in self._nodes:
                raise GraphError(f"duplicate node id {n.id!r}")
            self._nodes[n.id] = n
        self._edges = {}
        for e in edges:
            for end in (e.a, e.b):
                if end not in self._nodes:
                    raise GraphError(f"edge endpoint {end!r} is not a node")
            a, b = e.pair
            key = (a, b, e.category)
            if key in self._edges:
                raise GraphError(f"duplicate {e.category} edge between {a!r} and {b!r}")
            self._edges[key] = KgEdge(a, b, e.category, e.weight, e.source, e.value)
        self._adj = None

    @classmethod
    def from_edges(cls, edges, weight: float = 1.0) -> "KnowledgeGraph":
        """Bare graph for analytics; ``edges`` are (a, b) or (a, b, w) tuples."""
        ids = sorted({x for e in edges for x in e[:2]})
        nodes = [KgNode(i, "clinical", Modality.CLINICAL, 0.0, 0.0) for i in ids]
        es = [KgEdge(e[0], e[1], "correlated", e[2] if len(e) > 2 else weight, "pearson_r") for e in edges]
        return cls(nodes, es)

    def with_nodes(self, ids: Iterable[str]) -> "KnowledgeGraph":
        return KnowledgeGraph(list(self._nodes.values()) + [KgNode(i, "clinical", Modality.CLINICAL, 0.0, 0.0)
                                                             for i in ids if i not in self._nodes],
                              self.edges)

    @property
    def nodes(self) -> list[KgNode]:
        return [self._nodes[k] for k in sorted(self._nodes)]

    @property
    def node_ids(self) -> list[str]:
        return sorted(self._nodes)

    @property
    def edges(self) -> list[KgEdge]:
        return [self._edges[k] for k in sorted(self._edges)]

    def node(self, node_id: str) -> KgNode:
        return self._nodes[node_id]

    def __contains__(self, node_id) -> bool:
        return node_id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other) -> bool:
        return (isinstance(other, KnowledgeGraph) and self.nodes == other.nodes
                and self.edges == other.edges)

    def adjacency(self) -> dict:
        """node -> {neighbor: weight} on the collapsed simple graph."""
        if self._adj is None:
            adj = {n: {} for n in sorted(self._nodes)}
            for e in self.edges:
                w = max(adj[e.a].get(e.b, 0.0), e.weight)
                adj[e.a][e.b] = adj[e.b][e.a] = w
            self._adj = adj
        return {k: dict(v) for k, v in self._adj.items()}

    def simple_edges(self) -> list[tuple]:
        return sorted({(min(e.a, e.b), max(e.a, e.b)) for e in self.edges})

    def degrees(self) -> dict:
        return {k: len(v) for k, v in self.adjacency().items()}

    def relabeled(self, mapping: Mapping[str, str]) -> "KnowledgeGraph":
        nodes = [KgNode(mapping[n.id], n.node_type, n.modality, n.effect, n.p_adj, n.attrs, n.test)
                 for n in self.nodes]
        edges = [KgEdge(mapping[e.a], mapping[e.b], e.category, e.weight, e.source, e.value)
                 for e in self.edges]
        return KnowledgeGraph(nodes, edges)


def edge_weight_from_effect(effect: float, source: str = "cohens_d") -> float:
    """Map a Cohen's d (or odds ratio, via d = ln(OR) * sqrt(3) / pi) to [0, 1).

    Uses the d-to-r conversion |d| / sqrt(d^2 + 4).
    """
    if source == "odds_ratio":
        if effect <= 0:
            raise DataError("odds ratio must be positive")
        d = math.log(effect) * math.sqrt(3.0) / math.pi
    elif source == "cohens_d":
        d = effect
    else:
        raise DataError(f"cannot derive a weight from {source!r}")
    return abs(d) / math.sqrt(d * d + 4.0)


def edge_category(source: str, type_a: str, type_b: str) -> str:
    """Category rule in precedence order: correlation, gene, MRI volume, clinical."""
    types = {type_a, type_b}
    if source == "pearson_r":
        return "correlated"
    if "genetic" in types:
        return "expression_related"
    if "imaging" in types:
        return "volume_associated"
    if "clinical" in types:
        return "risk_factor"
    return "correlated"


@dataclass(frozen=True)
class EffectRelation:
    """A relationship measured by an effect size instead of a correlation."""

    feature_a: str
    feature_b: str
    effect: float
    source: str  # "cohens_d" or "odds_ratio"


@dataclass
class BuildReport:
    skipped_unselected: list = field(default_factory=list)
    below_threshold: int = 0
    not_significant: int = 0


def build_graph(stats: Sequence[FeatureStat], correlations: Sequence[CorrelationEntry] = (),
                thresholds: Thresholds = Thresholds(), relations: Sequence[EffectRelation] = (),
                node_attrs: Mapping[str, Mapping[str, str]] | None = None,
                report: BuildReport | None = None) -> KnowledgeGraph:
    """Nodes are the selected features; edges come from correlations and effect relations."""
    for v in (thresholds.p, thresholds.d, thresholds.odds_ratio, thresholds.log2fc, thresholds.r_min):
        if not math.isfinite(v):
            raise DataError("thresholds must be finite")
    report = report if report is not None else BuildReport()
    node_attrs = node_attrs or {}
    nodes = {}
    for s in stats:
        if not s.selected:
            continue
        if not (s.p_adj < thresholds.p and passes_effect(s, thresholds)):
            raise DataError(f"feature {s.feature!r} is flagged selected but fails the node thresholds")
        if s.feature in nodes:
            raise GraphError(f"feature {s.feature!r} selected in two modalities")
        nodes[s.feature] = KgNode(s.feature, NODE_TYPE_OF[s.modality], s.modality, s.effect, s.p_adj,
                                  dict(node_attrs.get(s.feature, {})), s.test)
    edges = {}
    for c in correlations:
        if c.feature_a not in nodes or c.feature_b not in nodes:
            report.skipped_unselected.append((c.feature_a, c.feature_b))
            continue
        p = c.p if math.isnan(c.p_adj) else c.p_adj
        if not p < thresholds.p:
            report.not_significant += 1
            continue
        if not abs(c.r) > thresholds.r_min:
            report.below_threshold += 1
            continue
        if c.feature_a == c.feature_b:
            continue
        e = KgEdge(c.feature_a, c.feature_b, "correlated", abs(c.r), "pearson_r", c.r)
        key = (*e.pair, e.category)
        if key not in edges or edges[key].weight < e.weight:
            edges[key] = e
    for rel in relations:
        if rel.feature_a not in nodes or rel.feature_b not in nodes:
            report.skipped_unselected.append((rel.feature_a, rel.feature_b))
            continue
        w = edge_weight_from_effect(rel.effect, rel.source)
        if w <= 0:
            continue
        cat = edge_category(rel.source, nodes[rel.feature_a].node_type, nodes[rel.feature_b].node_type)
        e = KgEdge(rel.feature_a, rel.feature_b, cat, w, rel.source, rel.effect)
        key = (*e.pair, e.category)
        if key not in edges or edges[key].weight < e.weight:
            edges[key] = e
    if report.skipped_unselected:
        LOGGER.warning("skipped %d relationships referencing unselected features",
                       len(report.skipped_unselected))
    return KnowledgeGraph(nodes.values(), edges.values())
