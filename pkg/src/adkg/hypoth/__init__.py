"""Prompting, multi-model querying, parsing, scoring and consensus."""

from adkg.hypoth.consensus import ConsensusReport, MockLiterature, PubMedClient, consensus, novelty_score
from adkg.hypoth.model import RELATIONS, Hypothesis, Rubric, Triple, canonical, score_hypothesis, sort_hypotheses
from adkg.hypoth.parse import parse_hypotheses, render_block
from adkg.hypoth.prompt import serialize_graph_prompt
from adkg.hypoth.providers import HttpProvider, MockProvider, query_model

__all__ = [
    "ConsensusReport", "HttpProvider", "Hypothesis", "MockLiterature", "MockProvider", "PubMedClient",
    "RELATIONS", "Rubric", "Triple", "canonical", "consensus", "novelty_score", "parse_hypotheses",
    "query_model", "render_block", "score_hypothesis", "serialize_graph_prompt", "sort_hypotheses",
]
