"""Graph null-model tests, inter-rater agreement and cross-cohort replication."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from adkg.errors import DataError, GraphError, SchemaError
from adkg.kgraph.community import louvain
from adkg.kgraph.graph import KnowledgeGraph
from adkg.kgraph.metrics import avg_path_length, clustering_coefficient
from adkg.kgraph.rewire import _simple_edge_list, random_same_size, swap_edges
from adkg.parallel import pmap, substream

METRICS = ("clustering", "path_length", "modularity")


def graph_metric(g, metric: str, resolution: float = 1.0, seed: int = 0) -> float:
    if metric == "clustering":
        return clustering_coefficient(g)
    if metric == "path_length":
        return avg_path_length(g)
    if metric == "modularity":
        return louvain(g, resolution, seed).modularity
    raise DataError(f"unknown graph metric {metric!r}")


def empirical_p(observed: float, null: Sequence[float], direction: str = "greater") -> float:
    """(1 + #{null at least as extreme}) / (N + 1)."""
    null = np.asarray(null, dtype=float)
    if direction == "greater":
        hits = int(np.sum(null >= observed - 1e-12 * abs(observed)))
    elif direction == "less":
        hits = int(np.sum(null <= observed + 1e-12 * abs(observed)))
    else:
        raise DataError(f"direction must be 'greater' or 'less', not {direction!r}")
    return (1 + hits) / (null.size + 1)


@dataclass(frozen=True)
class PermutationTestResult:
    metric: str
    observed: float
    null_mean: float
    null_sd: float
    p: float
    n_null: int
    direction: str
    null_model: str


def graph_permutation_tests(g: KnowledgeGraph, metrics: Sequence[str] = METRICS, n_null: int = 1000,
                            seed: int = 0, directions: Mapping[str, str] | None = None,
                            null_model: str = "degree_preserving", swaps_per_edge: int = 10,
                            resolution: float = 1.0, workers: int = 1) -> dict:
    """Compare graph metrics with their distributions over one shared set of null graphs.

    Metrics are computed on the unweighted topology for both the observed
    graph and the nulls. Degree-preserving nulls use ``swaps_per_edge * |E|``
    double-edge swaps each and are checked to keep the degree sequence.
    """
    if n_null < 100:
        raise DataError("n_null must be at least 100")
    directions = dict(directions or {})
    for m in metrics:
        if m not in METRICS:
            raise DataError(f"unknown graph metric {m!r}")
        if directions.setdefault(m, "greater") not in ("greater", "less"):
            raise DataError(f"direction must be 'greater' or 'less', not {directions[m]!r}")
    if null_model not in ("degree_preserving", "erdos_renyi"):
        raise DataError(f"unknown null model {null_model!r}")
    if not g.edges:
        raise GraphError(f"{', '.join(metrics)} undefined on an edgeless graph")
    ids = g.node_ids
    base = [(e.a, e.b) for e in _simple_edge_list(g)]
    degrees = Counter(x for e in base for x in e)
    n_swaps = swaps_per_edge * len(base)

    def topology(pairs):
        adj = {v: {} for v in ids}
        for a, b in pairs:
            adj[a][b] = adj[b][a] = 1.0
        return adj

    observed = {m: graph_metric(topology(base), m, resolution, seed) for m in metrics}

    def one(i):
        rng = substream(seed, i)
        if null_model == "degree_preserving":
            pairs, _ = swap_edges(base, n_swaps, rng)
            if Counter(x for e in pairs for x in e) != degrees:
                raise AssertionError("null graph changed the degree sequence")
        else:
            pairs = [(e.a, e.b) for e in random_same_size(g, int(rng.integers(2**63 - 1))).edges]
        adj = topology(pairs)
        out = []
        for m in metrics:
            try:
                out.append(graph_metric(adj, m, resolution, seed))
            except GraphError:
                out.append(math.nan)
        return out

    nulls = np.array(pmap(one, range(n_null), workers), dtype=float).reshape(n_null, len(metrics))
    results = {}
    for k, m in enumerate(metrics):
        null = nulls[:, k][~np.isnan(nulls[:, k])]
        if null.size == 0:
            raise GraphError(f"{m} undefined on every null graph")
        results[m] = PermutationTestResult(m, observed[m], float(null.mean()), float(null.std(ddof=1)),
                                           empirical_p(observed[m], null, directions[m]), int(null.size),
                                           directions[m], null_model)
    return results


def graph_permutation_test(g: KnowledgeGraph, metric: str = "clustering", n_null: int = 1000, seed: int = 0,
                           direction: str = "greater", null_model: str = "degree_preserving",
                           swaps_per_edge: int = 10, resolution: float = 1.0,
                           workers: int = 1) -> PermutationTestResult:
    """Single-metric form of :func:`graph_permutation_tests`."""
    return graph_permutation_tests(g, (metric,), n_null, seed, {metric: direction}, null_model,
                                   swaps_per_edge, resolution, workers)[metric]


def cohens_kappa(r1: Sequence, r2: Sequence) -> float:
    if len(r1) != len(r2):
        raise DataError("rating vectors differ in length")
    n = len(r1)
    if n < 2:
        raise DataError("kappa needs at least two rated items")
    cats = sorted(set(r1) | set(r2), key=str)
    po = sum(a == b for a, b in zip(r1, r2)) / n
    c1, c2 = Counter(r1), Counter(r2)
    pe = sum(c1[c] * c2[c] for c in cats) / (n * n)
    if pe == 1.0:
        return 1.0 if po == 1.0 else 0.0
    return (po - pe) / (1.0 - pe)


@dataclass(frozen=True)
class ReplicationResult:
    effects: tuple
    mean: float
    dispersion_pct: float
    same_sign: bool
    passed: bool


def replication_check(effects: Mapping[str, Sequence[float]], threshold_pct: float = 15.0) -> dict:
    """Coefficient of variation (sample sd / |mean|, in percent) plus a sign-agreement rule."""
    out = {}
    for rel, vals in effects.items():
        v = np.asarray(vals, dtype=float)
        if v.size < 2:
            raise DataError(f"{rel}: replication needs at least two cohorts")
        mean = float(v.mean())
        if mean == 0:
            raise DataError(f"{rel}: CV undefined for zero mean")
        cv = float(v.std(ddof=1) / abs(mean) * 100.0)
        same = bool(np.all(v > 0) or np.all(v < 0))
        out[rel] = ReplicationResult(tuple(float(x) for x in v), mean, cv, same, bool(same and cv < threshold_pct))
    return out


RATER_HEADER = ("hypothesis_id", "rater_id", "plausibility", "literature", "testability")
CRITERIA = RATER_HEADER[2:]


def read_rater_scores(text: str) -> dict:
    """Parse rater CSV into rater -> criterion -> {hypothesis_id: score}."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != RATER_HEADER:
        raise SchemaError(f"rater file header must be {','.join(RATER_HEADER)}")
    out = {}
    for row in reader:
        for c in CRITERIA:
            score = int(row[c])
            if not 1 <= score <= 5:
                raise DataError(f"score {score} for {row['hypothesis_id']} outside 1..5")
            out.setdefault(row["rater_id"], {}).setdefault(c, {})[row["hypothesis_id"]] = score
    return out


def pairwise_kappas(scores: dict) -> dict:
    """Kappa per rater pair and criterion over the hypotheses both raters scored."""
    raters = sorted(scores)
    if len(raters) < 2:
        raise DataError("need ratings from at least two raters")
    out = {}
    for a, b in itertools.combinations(raters, 2):
        per = {}
        for c in CRITERIA:
            common = sorted(set(scores[a].get(c, {})) & set(scores[b].get(c, {})))
            per[c] = cohens_kappa([scores[a][c][h] for h in common], [scores[b][c][h] for h in common])
        out[f"{a}~{b}"] = per
    return out


@dataclass
class ValidationReport:
    graph_metric_pvalues: dict = field(default_factory=dict)
    consensus_rate: float | None = None
    kappas: dict = field(default_factory=dict)
    replication: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "graph_metric_pvalues": {k: asdict(v) for k, v in self.graph_metric_pvalues.items()},
            "consensus_rate": self.consensus_rate,
            "kappas": self.kappas,
            "replication": {k: asdict(v) for k, v in self.replication.items()},
            "notes": list(self.notes),
        }

    def to_json(self, provenance: dict | None = None) -> str:
        d = self.to_dict()
        d["provenance"] = provenance or {}
        return json.dumps(d, sort_keys=True, indent=2) + "\n"

    def to_markdown(self, provenance: dict | None = None) -> str:
        buf = io.StringIO()
        buf.write("# Validation report\n\n")
        if provenance:
            buf.write(f"Config hash `{provenance.get('config_sha256', '')}`, seed {provenance.get('seed')}.\n\n")
        buf.write("## Graph structure against null graphs\n\n")
        buf.write("| metric | observed | null mean | null sd | p | nulls | direction |\n|---|---|---|---|---|---|---|\n")
        for k, r in sorted(self.graph_metric_pvalues.items()):
            buf.write(f"| {k} | {r.observed:.4f} | {r.null_mean:.4f} | {r.null_sd:.4f} | {r.p:.4g} | "
                      f"{r.n_null} | {r.direction} |\n")
        buf.write("\n## Model consensus\n\n")
        rate = "n/a" if self.consensus_rate is None else f"{self.consensus_rate:.3f}"
        buf.write(f"Mean pairwise Jaccard agreement of canonical triples: {rate}\n\n")
        buf.write("## Inter-rater agreement (Cohen's kappa)\n\n")
        if self.kappas:
            buf.write("| raters | " + " | ".join(CRITERIA) + " |\n|---|" + "---|" * len(CRITERIA) + "\n")
            for pair, per in sorted(self.kappas.items()):
                buf.write(f"| {pair} | " + " | ".join(f"{per[c]:.3f}" for c in CRITERIA) + " |\n")
        else:
            buf.write("No rater files supplied.\n")
        buf.write("\n## Cross-cohort replication\n\n")
        buf.write("| relationship | effects | CV % | same sign | pass |\n|---|---|---|---|---|\n")
        for rel, r in sorted(self.replication.items()):
            eff = ", ".join(f"{x:.3f}" for x in r.effects)
            buf.write(f"| {rel} | {eff} | {r.dispersion_pct:.1f} | {r.same_sign} | {r.passed} |\n")
        if self.notes:
            buf.write("\n## Notes\n\n")
            for n in self.notes:
                buf.write(f"- {n}\n")
        return buf.getvalue()
