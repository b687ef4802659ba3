"""Graph-to-prompt serialization for staged hypothesis generation."""

from __future__ import annotations

from adkg.errors import DataError, GraphError
from adkg.hypoth.model import RELATIONS
from adkg.kgraph.metrics import betweenness

STAGES = {
    "known": "Stage 1: list relationships in this graph that published literature already supports.",
    "novel": "Stage 2: identify cross-modality connections that look novel.",
    "hypotheses": "Stage 3: propose testable mechanistic hypotheses from these relationships.",
}

HEADER = (
    "Alzheimer's knowledge graph from unmatched cohorts (nodes: significant features; "
    "edges: correlation or effect strength).\n{stage}\n"
    "Think step by step (chain-of-thought) and explain your reasoning for each relationship.\n"
)
SCHEMA = (
    "Reply with a block:\n```HYPOTHESES\n"
    '[{{"id":..,"triples":[{{"subject":node,"relation":verb,"object":node}}],"narrative":..,"reasoning":..}}]\n'
    "```\nverb in: {verbs}\n"
)


def _fmt(x: float) -> str:
    return f"{x:.3g}"


def _render(g, keep: list, stage: str) -> str:
    keep_set = set(keep)
    lines = [HEADER.format(stage=STAGES[stage]), "NODES id|modality|effect|p\n"]
    for nid in keep:
        n = g.node(nid)
        lines.append(f"{n.id}|{n.modality.value}|{_fmt(n.effect)}|{_fmt(n.p_adj)}\n")
    lines.append("EDGES a|b|category|weight\n")
    for e in g.edges:
        if e.a in keep_set and e.b in keep_set:
            lines.append(f"{e.a}|{e.b}|{e.category}|{e.weight:.3f}\n")
    lines.append(SCHEMA.format(verbs=",".join(RELATIONS)))
    return "".join(lines)


def serialize_graph_prompt(g, budget: int = 20000, stage: str = "hypotheses") -> str:
    """Prompt text no longer than ``budget`` characters.

    When the whole graph does not fit, nodes are kept in descending
    betweenness order (ties by id) and only edges among kept nodes are listed.
    """
    if budget < 500:
        raise DataError("prompt budget must be at least 500 characters")
    if stage not in STAGES:
        raise DataError(f"unknown stage {stage!r}")
    if len(g) == 0:
        raise GraphError("cannot build a prompt from an empty graph")
    full = _render(g, g.node_ids, stage)
    if len(full) <= budget:
        return full
    bc = betweenness(g)
    ranked = sorted(g.node_ids, key=lambda v: (-bc[v], v))
    lo, hi = 0, len(ranked)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if len(_render(g, sorted(ranked[:mid]), stage)) <= budget:
            lo = mid
        else:
            hi = mid - 1
    text = _render(g, sorted(ranked[:lo]), stage)
    if len(text) > budget:
        raise DataError("prompt template alone exceeds the budget")
    return text
