"""Weighted modularity and Louvain community detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from adkg.errors import GraphError

GAIN_EPS = 1e-12


def _adj(g) -> dict:
    return g.adjacency() if hasattr(g, "adjacency") else g


def _as_labels(partition, nodes) -> dict:
    if isinstance(partition, dict):
        labels = dict(partition)
    else:
        labels = {}
        for c, members in enumerate(partition):
            for v in members:
                if v in labels:
                    raise GraphError(f"node {v!r} appears in two communities")
                labels[v] = c
    missing = [v for v in nodes if v not in labels]
    if missing:
        raise GraphError(f"partition does not cover node(s) {missing}")
    extra = [v for v in labels if v not in set(nodes)]
    if extra:
        raise GraphError(f"partition names unknown node(s) {extra}")
    return labels


def modularity(g, partition, resolution: float = 1.0) -> float:
    """Newman modularity, weighted: sum_c [w_in(c)/m - resolution * (deg(c)/2m)^2]."""
    adj = _adj(g)
    labels = _as_labels(partition, list(adj))
    m = sum(w for v in adj for u, w in adj[v].items()) / 2.0
    if m == 0:
        raise GraphError("modularity undefined on an edgeless graph")
    inside, degree = {}, {}
    for v, nbrs in adj.items():
        c = labels[v]
        degree[c] = degree.get(c, 0.0) + sum(nbrs.values())
        for u, w in nbrs.items():
            if labels[u] == c:
                inside[c] = inside.get(c, 0.0) + w / 2.0
    return sum(inside.get(c, 0.0) / m - resolution * (degree[c] / (2.0 * m)) ** 2 for c in degree)


@dataclass(frozen=True)
class LouvainResult:
    partition: dict  # node id -> community index (0-based, ordered by smallest member id)
    modularity: float
    levels: tuple  # modularity after each aggregation level

    @property
    def communities(self) -> list[list]:
        groups = {}
        for v in sorted(self.partition):
            groups.setdefault(self.partition[v], []).append(v)
        return [groups[c] for c in sorted(groups)]


class _Level:
    """Aggregated graph: integer nodes, symmetric weights, self-loops hold internal weight."""

    def __init__(self, n, nbrs, loops):
        self.n = n
        self.nbrs = nbrs  # list of {j: w} without self
        self.loops = loops  # internal weight per node (each internal edge counted once)
        self.k = [2.0 * loops[i] + sum(nbrs[i].values()) for i in range(n)]
        self.m = sum(self.k) / 2.0

    def quality(self, comm, resolution):
        inside, tot = {}, {}
        for i in range(self.n):
            c = comm[i]
            tot[c] = tot.get(c, 0.0) + self.k[i]
            inside[c] = inside.get(c, 0.0) + self.loops[i]
            for j, w in self.nbrs[i].items():
                if comm[j] == c:
                    inside[c] += w / 2.0
        m = self.m
        return sum(inside.get(c, 0.0) / m - resolution * (tot[c] / (2 * m)) ** 2 for c in tot)


def _one_level(level: _Level, order, resolution):
    comm = list(range(level.n))
    tot = list(level.k)
    m2 = 2.0 * level.m
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            ki = level.k[i]
            links = {}
            for j, w in level.nbrs[i].items():
                links[comm[j]] = links.get(comm[j], 0.0) + w
            tot[ci] -= ki
            best_c = ci
            best_gain = links.get(ci, 0.0) - resolution * tot[ci] * ki / m2
            for c in sorted(links):
                gain = links[c] - resolution * tot[c] * ki / m2
                if gain > best_gain + GAIN_EPS:
                    best_c, best_gain = c, gain
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                improved = moved_any = True
    return comm, moved_any


def _aggregate(level: _Level, comm):
    ids = {}
    for i in range(level.n):
        ids.setdefault(comm[i], len(ids))
    n = len(ids)
    nbrs = [dict() for _ in range(n)]
    loops = [0.0] * n
    for i in range(level.n):
        a = ids[comm[i]]
        loops[a] += level.loops[i]
        for j, w in level.nbrs[i].items():
            b = ids[comm[j]]
            if a == b:
                loops[a] += w / 2.0
            else:
                nbrs[a][b] = nbrs[a].get(b, 0.0) + w
    return _Level(n, nbrs, loops), [ids[comm[i]] for i in range(level.n)]


def louvain(g, resolution: float = 1.0, seed: int = 0) -> LouvainResult:
    """Louvain local moving plus aggregation until a level produces no move.

    Nodes are visited in sorted-id order shuffled by ``seed``; modularity is
    checked to be non-decreasing across levels.
    """
    adj = _adj(g)
    names = sorted(adj)
    if sum(len(v) for v in adj.values()) == 0:
        raise GraphError("Louvain needs at least one edge")
    index = {v: i for i, v in enumerate(names)}
    level = _Level(len(names), [{index[u]: w for u, w in adj[v].items() if u != v} for v in names],
                   [adj[v].get(v, 0.0) for v in names])
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    member = list(range(len(names)))  # original node -> current level node
    history = [level.quality(list(range(level.n)), resolution)]
    while True:
        order = [int(i) for i in rng.permutation(level.n)]
        comm, moved = _one_level(level, order, resolution)
        if not moved:
            break
        q = level.quality(comm, resolution)
        assert q >= history[-1] - 1e-10, "modularity decreased across Louvain levels"
        history.append(q)
        level, mapping = _aggregate(level, comm)
        member = [mapping[c] for c in member]
    first = {}
    for v in names:
        first.setdefault(member[index[v]], len(first))
    partition = {v: first[member[index[v]]] for v in names}
    return LouvainResult(partition, modularity(adj, partition, resolution), tuple(history))
