"""Seeded synthetic graphs and graph inputs with planted structure."""

from __future__ import annotations

import itertools

import numpy as np

from adkg.ingest import Modality
from adkg.kgraph.graph import NODE_TYPE_OF, KgEdge, KgNode, KnowledgeGraph
from adkg.stats.tables import CorrelationEntry, FeatureStat

MODALITY_CYCLE = (Modality.MRI, Modality.EEG, Modality.BIOMARKER, Modality.CLINICAL, Modality.GENE_EXPRESSION)


def planted_blocks(n_nodes: int = 60, n_blocks: int = 3, p_in: float = 0.3, p_out: float = 0.02,
                   seed: int = 0) -> KnowledgeGraph:
    """Stochastic block model whose blocks each mix all five modalities.

    Edge weights are drawn from U(0.3, 0.9) inside blocks and U(0.3, 0.5)
    between them. Block membership is stored in the node attribute ``block``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    width = len(str(n_nodes))
    nodes, block = [], {}
    for i in range(n_nodes):
        mod = MODALITY_CYCLE[i % len(MODALITY_CYCLE)]
        nid = f"n{i:0{width}d}"
        block[nid] = i * n_blocks // n_nodes
        nodes.append(KgNode(nid, NODE_TYPE_OF[mod], mod, 1.0, 0.001, {"block": str(block[nid])}))
    edges = []
    for a, b in itertools.combinations([n.id for n in nodes], 2):
        same = block[a] == block[b]
        if rng.random() < (p_in if same else p_out):
            w = rng.uniform(0.3, 0.9) if same else rng.uniform(0.3, 0.5)
            edges.append(KgEdge(a, b, "correlated", float(w), "pearson_r", float(w)))
    return KnowledgeGraph(nodes, edges)


def _stat(feature, modality, effect, test="ttest"):
    method = {"ttest": "bonferroni", "anova": "bonferroni", "logistic_or": "bonferroni",
              "log2fc": "bh", "perm_maxT": "maxT"}[test]
    return FeatureStat(feature, modality, test, effect, 0.001, 0.004, method, True)


def pathway_inputs() -> tuple[list, list]:
    """Metabolic -> inflammation -> tau -> cognition chain with side branches.

    Returns (feature stats, correlation entries) ready for ``build_graph``.
    The metabolic side and the cognitive/structural side are joined only
    through Tau_phospho.
    """
    B, C, M = Modality.BIOMARKER, Modality.CLINICAL, Modality.MRI
    stats = [
        _stat("BMI", C, 1.9, "logistic_or"),
        _stat("Hypertension", C, 1.53, "logistic_or"),
        _stat("Cholesterol", C, 1.7, "logistic_or"),
        _stat("Inflammation", B, 0.9, "anova"),
        _stat("Amyloid", B, -0.8, "anova"),
        _stat("Tau_phospho", B, 1.6, "anova"),
        _stat("Tau_total", B, 1.1, "anova"),
        _stat("MMSE", C, 0.2, "logistic_or"),
        _stat("HippocampalVol", M, -1.2),
        _stat("BrainVolume", M, -0.9),
        _stat("Fp1_alpha", Modality.EEG, -0.7, "perm_maxT"),
    ]
    pairs = [
        ("BMI", "Inflammation", 0.59), ("Hypertension", "Inflammation", 0.53),
        ("BMI", "Hypertension", 0.31), ("Cholesterol", "BMI", 0.42),
        ("Inflammation", "Tau_phospho", 0.64), ("Amyloid", "Tau_phospho", 0.45),
        ("Tau_total", "Tau_phospho", 0.55), ("Tau_phospho", "MMSE", -0.72),
        ("MMSE", "HippocampalVol", 0.50), ("MMSE", "BrainVolume", 0.52),
        ("HippocampalVol", "BrainVolume", 0.60), ("HippocampalVol", "Fp1_alpha", 0.45),
    ]
    mod = {s.feature: s.modality for s in stats}
    corr = [CorrelationEntry(a, b, r, 1e-6, 500, 1e-5, mod[a], mod[b]) for a, b, r in pairs]
    return stats, corr
