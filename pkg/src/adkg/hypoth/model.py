"""Hypothesis records, canonical triples and the 1-5 rubric."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

from adkg.errors import DataError

RELATIONS = ("accelerates", "correlates_with", "predicts", "mediates", "protects_against")


@dataclass(frozen=True, order=True)
class Triple:
    subject: str
    relation: str
    object: str

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise DataError(f"relation {self.relation!r} not in vocabulary {RELATIONS}")


def canonical(triples) -> tuple:
    """Sorted, de-duplicated triples."""
    return tuple(sorted(set(triples)))


@dataclass(frozen=True)
class Rubric:
    biological_plausibility: int
    literature_support: int
    testability: int

    def __post_init__(self):
        for name in ("biological_plausibility", "literature_support", "testability"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= 5:
                raise DataError(f"{name} must be an integer in 1..5, got {v!r}")

    @property
    def impact(self) -> float:
        total = self.biological_plausibility + self.literature_support + self.testability
        # mean of three integers never lands on a .x5 tie
        return round(total / 3.0, 1)


@dataclass(frozen=True)
class Hypothesis:
    id: str
    triples: tuple
    narrative: str = ""
    model_id: str = ""
    reasoning: str = ""
    scores: Rubric | None = None
    novelty: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.triples:
            raise DataError(f"hypothesis {self.id!r} has no triples")
        object.__setattr__(self, "triples", canonical(self.triples))

    @property
    def key(self) -> tuple:
        return self.triples

    @property
    def node_ids(self) -> set:
        return {x for t in self.triples for x in (t.subject, t.object)}

    def content_id(self) -> str:
        text = "|".join(f"{t.subject},{t.relation},{t.object}" for t in self.triples)
        return "H" + hashlib.sha256(text.encode()).hexdigest()[:8]


def score_hypothesis(h: Hypothesis, criteria) -> Rubric:
    if len(criteria) != 3:
        raise DataError("rubric needs exactly three criteria")
    return Rubric(*criteria)


def with_scores(h: Hypothesis, rubric: Rubric) -> Hypothesis:
    return replace(h, scores=rubric)


def sort_hypotheses(hyps) -> list:
    """Impact descending, then id; unscored hypotheses last."""
    return sorted(hyps, key=lambda h: (h.scores is None, -(h.scores.impact if h.scores else 0.0), h.id))


def check_nodes(hyps, node_ids) -> None:
    known = set(node_ids)
    for h in hyps:
        bad = sorted(h.node_ids - known)
        if bad:
            raise DataError(f"hypothesis {h.id!r} references unknown node(s) {bad}")
