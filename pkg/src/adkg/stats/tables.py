"""Feature-level results, correlation tables and their CSV forms."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from adkg.errors import DataError, SchemaError
from adkg.ingest import Cohort, Modality
from adkg.stats.univariate import bh_fdr, pearson

TESTS = ("ttest", "anova", "logistic_or", "log2fc", "perm_maxT")
ADJUST = ("bonferroni", "bh", "maxT", "none")
FEATURE_HEADER = ("feature", "modality", "test", "effect", "p_raw", "p_adj", "method", "selected")
CORRELATION_HEADER = ("feature_a", "feature_b", "modality_a", "modality_b", "r", "p", "p_adj", "n")


@dataclass(frozen=True)
class Thresholds:
    p: float = 0.05
    d: float = 0.5
    odds_ratio: float = 1.5
    log2fc: float = 2.0
    r_min: float = 0.3


@dataclass(frozen=True)
class FeatureStat:
    feature: str
    modality: Modality
    test: str
    effect: float
    p_raw: float
    p_adj: float
    adjust_method: str
    selected: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.test not in TESTS:
            raise SchemaError(f"unknown test kind {self.test!r}")
        if self.adjust_method not in ADJUST:
            raise SchemaError(f"unknown adjustment {self.adjust_method!r}")


def passes_effect(stat: FeatureStat, th: Thresholds) -> bool:
    """Effect-size gate by test kind.

    Odds ratios are gated symmetrically (OR > t or OR < 1/t) so protective
    factors are not silently dropped.
    """
    if stat.test == "logistic_or":
        return stat.effect > 0 and max(stat.effect, 1.0 / stat.effect) > th.odds_ratio
    if stat.test == "log2fc":
        return abs(stat.effect) > th.log2fc
    return abs(stat.effect) > th.d


def apply_selection(stats: Iterable[FeatureStat], th: Thresholds) -> list[FeatureStat]:
    return [replace(s, selected=bool(s.p_adj < th.p and passes_effect(s, th))) for s in stats]


def write_feature_stats(stats: Sequence[FeatureStat], header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FEATURE_HEADER)
    for s in stats:
        w.writerow([s.feature, s.modality.value, s.test, _num(s.effect), _num(s.p_raw), _num(s.p_adj),
                    s.adjust_method, "true" if s.selected else "false"])
    return buf.getvalue()


def read_feature_stats(text: str) -> list[FeatureStat]:
    rows = _read(text, FEATURE_HEADER)
    return [FeatureStat(r["feature"], Modality(r["modality"]), r["test"], float(r["effect"]),
                        float(r["p_raw"]), float(r["p_adj"]), r["method"], r["selected"] == "true")
            for r in rows]


@dataclass(frozen=True)
class CorrelationEntry:
    feature_a: str
    feature_b: str
    r: float
    p: float
    n: int
    p_adj: float = math.nan
    modality_a: Modality | None = None
    modality_b: Modality | None = None

    def swapped(self) -> "CorrelationEntry":
        return replace(self, feature_a=self.feature_b, feature_b=self.feature_a,
                       modality_a=self.modality_b, modality_b=self.modality_a)


def correlation_table(cohort: Cohort, features: Sequence[str] | None = None,
                      modality_of: dict | None = None) -> list[CorrelationEntry]:
    """Pairwise Pearson correlations over complete cases, BH-adjusted within the table."""
    features = list(features or cohort.feature_names)
    modality_of = modality_of or {}
    entries = []
    for a, b in itertools.combinations(features, 2):
        x, y = cohort.column(a), cohort.column(b)
        ok = ~(np.isnan(x) | np.isnan(y))
        try:
            r, p = pearson(x[ok], y[ok])
        except DataError:
            continue
        entries.append(CorrelationEntry(a, b, r, p, int(ok.sum()), math.nan,
                                        modality_of.get(a, cohort.modality),
                                        modality_of.get(b, cohort.modality)))
    if entries:
        adj, _ = bh_fdr([e.p for e in entries])
        entries = [replace(e, p_adj=float(q)) for e, q in zip(entries, adj)]
    return entries


def write_correlations(entries: Sequence[CorrelationEntry], header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CORRELATION_HEADER)
    for e in entries:
        w.writerow([e.feature_a, e.feature_b, e.modality_a.value if e.modality_a else "",
                    e.modality_b.value if e.modality_b else "", _num(e.r), _num(e.p), _num(e.p_adj), e.n])
    return buf.getvalue()


def read_correlations(text: str) -> list[CorrelationEntry]:
    out = []
    for r in _read(text, CORRELATION_HEADER):
        out.append(CorrelationEntry(r["feature_a"], r["feature_b"], float(r["r"]), float(r["p"]),
                                    int(r["n"]), float(r["p_adj"]),
                                    Modality(r["modality_a"]) if r["modality_a"] else None,
                                    Modality(r["modality_b"]) if r["modality_b"] else None))
    return out


def _num(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else str(x)


def _read(text: str, header: Sequence[str]) -> list[dict]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError("empty table")
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != tuple(header):
        raise SchemaError(f"unexpected header {reader.fieldnames}, expected {list(header)}")
    return list(reader)
