"""Degree-preserving double-edge swaps and same-size random graphs."""

from __future__ import annotations

import numpy as np

from adkg.errors import GraphError
from adkg.kgraph.graph import KgEdge, KnowledgeGraph

TRIES_PER_SWAP = 100


def _simple_edge_list(g: KnowledgeGraph):
    """One edge per pair (the heaviest), endpoints sorted."""
    best = {}
    for e in g.edges:
        if e.pair not in best or best[e.pair].weight < e.weight:
            best[e.pair] = e
    return [best[k] for k in sorted(best)]


def swap_edges(edges: list, n_swaps: int, rng: np.random.Generator) -> tuple[list, int]:
    """Double-edge swaps on (u, v) tuples: (u,v),(x,y) -> (u,x),(v,y).

    Swaps that would create a self-loop or duplicate an existing pair are
    rejected. Stops after ``n_swaps`` successes or ``100 * n_swaps`` tries.
    Returns the new edge list (same positions as the input) and the swap count.
    """
    edges = list(edges)
    m = len(edges)
    if n_swaps <= 0 or m < 2:
        return edges, 0
    labels = sorted({x for e in edges for x in e})
    code = {x: i for i, x in enumerate(labels)}
    n = len(labels)
    work = [(code[u], code[v]) for u, v in edges]
    present = {min(u, v) * n + max(u, v) for u, v in work}
    done = tries = 0
    budget = TRIES_PER_SWAP * n_swaps
    while done < n_swaps and tries < budget:
        batch = min(4096, budget - tries)
        picks = rng.integers(0, m, size=(batch, 2)).tolist()
        flips = (rng.random(batch) < 0.5).tolist()
        for (i, j), flip in zip(picks, flips):
            tries += 1
            if i == j:
                continue
            u, v = work[i]
            x, y = work[j]
            if flip:
                x, y = y, x
            if u == x or u == y or v == x or v == y:
                continue
            a = min(u, x) * n + max(u, x)
            b = min(v, y) * n + max(v, y)
            if a in present or b in present:
                continue
            present.discard(min(u, v) * n + max(u, v))
            present.discard(min(x, y) * n + max(x, y))
            present.add(a)
            present.add(b)
            work[i] = (u, x)
            work[j] = (v, y)
            done += 1
            if done >= n_swaps:
                break
    return [(labels[u], labels[v]) for u, v in work], done


def rewire_preserving_degrees(g: KnowledgeGraph, n_swaps: int, seed: int) -> KnowledgeGraph:
    """Null graph with the same degree sequence; edges keep their attributes as they move."""
    if n_swaps < 0:
        raise GraphError("n_swaps must be nonnegative")
    base = _simple_edge_list(g)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    pairs, _ = swap_edges([(e.a, e.b) for e in base], n_swaps, rng)
    edges = [KgEdge(a, b, e.category, e.weight, e.source, e.value) for (a, b), e in zip(pairs, base)]
    return KnowledgeGraph(g.nodes, edges)


def random_same_size(g: KnowledgeGraph, seed: int) -> KnowledgeGraph:
    """Uniform random simple graph on the same nodes with the same edge count."""
    ids = g.node_ids
    base = _simple_edge_list(g)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    n = len(ids)
    all_pairs = [(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n)]
    chosen = sorted(rng.choice(len(all_pairs), size=len(base), replace=False))
    edges = [KgEdge(*all_pairs[k], e.category, e.weight, e.source, e.value) for k, e in zip(chosen, base)]
    return KnowledgeGraph(g.nodes, edges)
