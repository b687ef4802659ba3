"""Cross-model agreement and literature novelty."""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import httpx

from adkg.errors import DataError, ProviderError

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConsensusReport:
    pairwise: dict  # "modelA~modelB" -> Jaccard
    rate: float
    per_hypothesis: dict  # "model/id" -> fraction of models sharing the triple set
    counts: dict  # model -> number of hypotheses


def _jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def consensus(hyps_by_model: dict) -> ConsensusReport:
    """Mean pairwise Jaccard similarity of the models' canonical triple sets."""
    models = sorted(hyps_by_model)
    if len(models) < 2:
        raise DataError("consensus needs at least two models")
    triples = {m: {t for h in hyps_by_model[m] for t in h.triples} for m in models}
    keys = {m: {h.key for h in hyps_by_model[m]} for m in models}
    pairwise = {f"{a}~{b}": _jaccard(triples[a], triples[b]) for a, b in itertools.combinations(models, 2)}
    rate = sum(pairwise.values()) / len(pairwise)
    per = {}
    for m in models:
        for h in hyps_by_model[m]:
            per[f"{m}/{h.id}"] = sum(h.key in keys[o] for o in models) / len(models)
    return ConsensusReport(pairwise, rate, per, {m: len(hyps_by_model[m]) for m in models})


def literature_query(h) -> str:
    terms = sorted({x for t in h.triples for x in (t.subject, t.object)})
    return " AND ".join(f'"{t.replace("_", " ")}"' for t in terms)


class PubMedClient:
    """E-utilities style search returning hit counts for a date-restricted query."""

    def __init__(self, endpoint: str = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi",
                 database: str = "pubmed", client: httpx.Client | None = None, timeout: float = 30.0):
        self.endpoint = endpoint
        self.database = database
        self.client = client
        self.timeout = timeout

    def count(self, query: str, mindate: int, maxdate: int) -> int:
        params = {"db": self.database, "term": query, "datetype": "pdat", "mindate": str(mindate),
                  "maxdate": str(maxdate), "rettype": "count", "retmode": "json"}
        client = self.client or httpx.Client(timeout=self.timeout)
        try:
            resp = client.get(self.endpoint, params=params)
            resp.raise_for_status()
            return int(resp.json()["esearchresult"]["count"])
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise ProviderError(f"literature search failed: {exc}") from exc
        finally:
            if self.client is None:
                client.close()


class MockLiterature:
    """Counts from a JSON file: {"default": n, "counts": {query: n}}."""

    def __init__(self, path=None, default: int | None = None, counts: dict | None = None):
        data = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
        self.default = data.get("default", default)
        self.counts = dict(data.get("counts", {}), **(counts or {}))

    def count(self, query: str, mindate: int, maxdate: int) -> int:
        if query in self.counts:
            return int(self.counts[query])
        if self.default is None:
            raise ProviderError(f"no mock count for query {query!r}")
        return int(self.default)


@dataclass(frozen=True)
class Novelty:
    score: float
    hits: int
    query: str


def novelty_score(h, lit, reference_year: int, window_years: int = 10) -> Novelty:
    """1 / (1 + hits) over the last ``window_years`` publication years."""
    q = literature_query(h)
    hits = lit.count(q, reference_year - window_years + 1, reference_year)
    if hits < 0:
        raise ProviderError("negative hit count")
    LOGGER.info("novelty query %s -> %d hits", q, hits)
    return Novelty(1.0 / (1.0 + hits), hits, q)
