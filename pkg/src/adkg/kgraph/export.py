"""GraphML, DOT and JSON serialization of knowledge graphs."""

from __future__ import annotations

import json
import math
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

from adkg.errors import AdkgError
from adkg.ingest import Modality
from adkg.kgraph.graph import KgEdge, KgNode, KnowledgeGraph

DOT_COLORS = {
    "eeg": "lightblue",
    "genetic": "green",
    "imaging": "yellow",
    "molecular": "red",
    "clinical": "orange",
}


def _num(x: float):
    return x if math.isfinite(x) else str(x)


def to_dict(g: KnowledgeGraph, provenance: dict | None = None) -> dict:
    return {
        "provenance": provenance or {},
        "nodes": [
            {"id": n.id, "node_type": n.node_type, "modality": n.modality.value, "effect": _num(n.effect),
             "p_adj": _num(n.p_adj), "test": n.test, "attrs": dict(n.attrs)}
            for n in g.nodes
        ],
        "edges": [
            {"a": e.a, "b": e.b, "category": e.category, "weight": e.weight, "source": e.source,
             "value": _num(e.value)}
            for e in g.edges
        ],
    }


def to_json(g: KnowledgeGraph, provenance: dict | None = None) -> str:
    return json.dumps(to_dict(g, provenance), sort_keys=True, indent=2) + "\n"


def from_dict(d: dict) -> KnowledgeGraph:
    nodes = [KgNode(n["id"], n["node_type"], Modality(n["modality"]), float(n["effect"]), float(n["p_adj"]),
                    dict(n.get("attrs", {})), n.get("test", "")) for n in d["nodes"]]
    edges = [KgEdge(e["a"], e["b"], e["category"], float(e["weight"]), e["source"], float(e["value"]))
             for e in d["edges"]]
    return KnowledgeGraph(nodes, edges)


def from_json(text: str) -> KnowledgeGraph:
    return from_dict(json.loads(text))


def to_graphml(g: KnowledgeGraph, provenance: dict | None = None) -> str:
    attr_keys = sorted({k for n in g.nodes for k in n.attrs})
    node_keys = [("node_type", "string"), ("modality", "string"), ("effect", "double"),
                 ("p_adj", "double"), ("test", "string")] + [(f"attr_{k}", "string") for k in attr_keys]
    edge_keys = [("category", "string"), ("weight", "double"), ("source", "string"), ("value", "double")]
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<graphml xmlns="http://graphml.graphdrawing.org/xmlns" '
           'xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" '
           'xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns '
           'http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">']
    if provenance:
        out.append(f"  <desc>{escape(json.dumps(provenance, sort_keys=True))}</desc>")
    for k, t in node_keys:
        out.append(f'  <key id="n_{k}" for="node" attr.name="{k}" attr.type="{t}"/>')
    for k, t in edge_keys:
        out.append(f'  <key id="e_{k}" for="edge" attr.name="{k}" attr.type="{t}"/>')
    out.append('  <graph id="G" edgedefault="undirected">')
    for n in g.nodes:
        out.append(f"    <node id={quoteattr(n.id)}>")
        vals = {"node_type": n.node_type, "modality": n.modality.value, "effect": n.effect,
                "p_adj": n.p_adj, "test": n.test, **{f"attr_{k}": v for k, v in n.attrs.items()}}
        for k, _ in node_keys:
            if k in vals:
                out.append(f'      <data key="n_{k}">{escape(str(vals[k]))}</data>')
        out.append("    </node>")
    for i, e in enumerate(g.edges):
        out.append(f'    <edge id="e{i}" source={quoteattr(e.a)} target={quoteattr(e.b)}>')
        for k, v in (("category", e.category), ("weight", e.weight), ("source", e.source), ("value", e.value)):
            out.append(f'      <data key="e_{k}">{escape(str(v))}</data>')
        out.append("    </edge>")
    out.append("  </graph>")
    out.append("</graphml>")
    return "\n".join(out) + "\n"


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: KnowledgeGraph, provenance: dict | None = None) -> str:
    out = []
    if provenance:
        out.append("/* " + json.dumps(provenance, sort_keys=True).replace("*/", "* /") + " */")
    out.append("graph KG {")
    out.append("  node [style=filled, shape=ellipse];")
    for n in g.nodes:
        color = DOT_COLORS.get(n.node_type, "white")
        out.append(f"  {_dot_id(n.id)} [fillcolor={color}, class={n.node_type}];")
    for e in g.edges:
        out.append(f"  {_dot_id(e.a)} -- {_dot_id(e.b)} "
                   f"[penwidth={1 + 4 * e.weight:.3f}, weight={e.weight:.6g}, label={_dot_id(e.category)}];")
    out.append("}")
    return "\n".join(out) + "\n"


FORMATS = {"json": to_json, "graphml": to_graphml, "dot": to_dot}


def export(g: KnowledgeGraph, fmt: str, path=None, provenance: dict | None = None) -> bytes:
    """Render ``g`` in ``fmt``; writes to ``path`` when given and returns the bytes."""
    try:
        render = FORMATS[fmt]
    except KeyError:
        raise AdkgError(f"unknown export format {fmt!r}") from None
    data = render(g, provenance).encode("utf-8")
    if path is not None:
        try:
            Path(path).write_bytes(data)
        except OSError as exc:
            raise AdkgError(f"cannot write {path}: {exc}") from exc
    return data
