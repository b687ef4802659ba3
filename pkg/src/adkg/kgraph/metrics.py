"""Structural metrics on the collapsed, unweighted view of a knowledge graph."""

from __future__ import annotations

import logging
from collections import deque

from adkg.errors import GraphError

LOGGER = logging.getLogger(__name__)


def _adj(g) -> dict:
    return g.adjacency() if hasattr(g, "adjacency") else g


def _bfs(adj, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def betweenness(g) -> dict:
    """Brandes accumulation over unweighted shortest paths, scaled by (n-1)(n-2)/2."""
    adj = _adj(g)
    nodes = sorted(adj)
    bc = dict.fromkeys(nodes, 0.0)
    for s in nodes:
        stack, pred = [], {v: [] for v in nodes}
        sigma = dict.fromkeys(nodes, 0)
        sigma[s] = 1
        dist = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            stack.append(v)
            for w in sorted(adj[v]):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    pred[w].append(v)
        delta = dict.fromkeys(nodes, 0.0)
        while stack:
            w = stack.pop()
            for v in pred[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    n = len(nodes)
    # each unordered pair was counted from both endpoints
    scale = 0.0 if n < 3 else 1.0 / ((n - 1) * (n - 2))
    return {v: bc[v] * scale for v in nodes}


def local_clustering(g) -> dict:
    adj = _adj(g)
    out = {}
    for v, nbrs in adj.items():
        nb = [u for u in nbrs if u != v]
        k = len(nb)
        if k < 2:
            out[v] = 0.0
            continue
        links = sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b in adj[a])
        out[v] = 2.0 * links / (k * (k - 1))
    return out


def clustering_coefficient(g) -> float:
    """Average local clustering; nodes of degree < 2 contribute 0."""
    loc = local_clustering(g)
    return sum(loc.values()) / len(loc) if loc else 0.0


def connected_components(g) -> list[list]:
    """Components as sorted id lists, largest first, ties by smallest id."""
    adj = _adj(g)
    seen, comps = set(), []
    for s in sorted(adj):
        if s in seen:
            continue
        comp = sorted(_bfs(adj, s))
        seen.update(comp)
        comps.append(comp)
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def avg_path_length(g) -> float:
    """Mean BFS distance over ordered pairs of the largest connected component.

    Equal-size largest components are resolved toward the one holding the
    lexicographically smallest node id.
    """
    adj = _adj(g)
    comps = connected_components(adj)
    if not comps or len(comps[0]) < 2:
        raise GraphError("no connected component with at least two nodes")
    if len(comps) > 1 and len(comps[1]) == len(comps[0]):
        LOGGER.warning("several largest components of size %d; using the one containing %r",
                       len(comps[0]), comps[0][0])
    comp = comps[0]
    total = 0
    for s in comp:
        total += sum(_bfs(adj, s).values())
    n = len(comp)
    return total / (n * (n - 1))
