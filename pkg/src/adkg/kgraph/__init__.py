"""Knowledge graph construction, analytics, null models and export."""

from adkg.kgraph.community import LouvainResult, louvain, modularity
from adkg.kgraph.export import export, from_json, to_dot, to_graphml, to_json
from adkg.kgraph.graph import (
    BuildReport,
    EffectRelation,
    KgEdge,
    KgNode,
    KnowledgeGraph,
    build_graph,
    edge_category,
    edge_weight_from_effect,
)
from adkg.kgraph.metrics import avg_path_length, betweenness, clustering_coefficient, connected_components
from adkg.kgraph.rewire import random_same_size, rewire_preserving_degrees

__all__ = [
    "BuildReport", "EffectRelation", "KgEdge", "KgNode", "KnowledgeGraph", "LouvainResult",
    "avg_path_length", "betweenness", "build_graph", "clustering_coefficient", "connected_components",
    "edge_category", "edge_weight_from_effect", "export", "from_json", "louvain", "modularity",
    "random_same_size", "rewire_preserving_degrees", "to_dot", "to_graphml", "to_json",
]
