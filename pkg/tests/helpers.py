import itertools

import networkx as nx

from adkg.kgraph import KnowledgeGraph


def graph_from_pairs(pairs, weight=1.0, nodes=()):
    g = KnowledgeGraph.from_edges([(str(a), str(b)) for a, b in pairs], weight)
    extra = [str(v) for v in nodes if str(v) not in g]
    return g.with_nodes(extra) if extra else g


def from_nx(G):
    return graph_from_pairs(G.edges(), nodes=G.nodes())


def small_connected_graphs(max_nodes=7):
    """Every connected graph (up to isomorphism) with 2..max_nodes nodes."""
    for G in nx.graph_atlas_g():
        if 2 <= G.number_of_nodes() <= max_nodes and nx.is_connected(G):
            yield G


def clique(prefix, k):
    return [(f"{prefix}{i}", f"{prefix}{j}") for i, j in itertools.combinations(range(k), 2)]


def two_cliques_bridged(k=3):
    return graph_from_pairs(clique("a", k) + clique("b", k) + [("a0", "b0")])


def curated_community_graphs():
    """Graphs with community structure where Louvain must reach the global optimum."""
    return {
        "bridged_k3": two_cliques_bridged(3),
        "bridged_k4": two_cliques_bridged(4),
        "k4": graph_from_pairs(clique("a", 4)),
        "star5": from_nx(nx.star_graph(5)),
        "barbell": from_nx(nx.barbell_graph(3, 2)),
        "lollipop": from_nx(nx.lollipop_graph(4, 3)),
        "cube": from_nx(nx.hypercube_graph(3)),
        "k33": from_nx(nx.complete_bipartite_graph(3, 3)),
        "triangles_and_hub": graph_from_pairs(clique("a", 3) + clique("b", 3) + [("a0", "b0"), ("a1", "x"), ("b1", "x")]),
        "weighted": KnowledgeGraph.from_edges([
            ("a", "b", 0.9), ("b", "c", 0.4), ("c", "a", 0.7), ("c", "d", 0.35), ("d", "e", 0.8), ("e", "f", 0.6),
            ("d", "f", 0.5), ("f", "g", 0.3), ("g", "h", 0.9), ("h", "e", 0.4)]),
    }
