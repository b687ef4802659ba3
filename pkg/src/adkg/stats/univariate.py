"""Univariate tests, effect sizes and multiple-testing corrections."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from adkg.errors import DataError
from adkg.stats.distributions import (
    f_upper_p,
    studentized_range_critical,
    studentized_range_upper_p,
    t_two_sided_p,
)


def _vec(x, name="sample", min_len=2) -> np.ndarray:
    a = np.asarray(x, dtype=float).ravel()
    if a.size < min_len:
        raise DataError(f"{name} needs at least {min_len} values, got {a.size}")
    if np.isnan(a).any():
        raise DataError(f"{name} contains missing values")
    return a


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float


def welch_t_test(a, b) -> TTestResult:
    """Two-tailed Welch t-test with Satterthwaite degrees of freedom."""
    a, b = _vec(a, "a"), _vec(b, "b")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0 and vb == 0:
        raise DataError("degenerate samples: both groups have zero variance")
    sa, sb = va / a.size, vb / b.size
    se2 = sa + sb
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    df = se2 ** 2 / (sa ** 2 / (a.size - 1) + sb ** 2 / (b.size - 1))
    return TTestResult(float(t), float(df), t_two_sided_p(float(t), float(df)))


def welch_t_stat(a: np.ndarray, b: np.ndarray) -> float:
    """Welch statistic without error checks; +-inf when both variances vanish."""
    diff = a.mean() - b.mean()
    se2 = a.var(ddof=1) / a.size + b.var(ddof=1) / b.size
    if se2 == 0:
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return float(diff / math.sqrt(se2))


def pooled_sd(a, b) -> float:
    a, b = _vec(a, "a"), _vec(b, "b")
    ss = (a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)
    return math.sqrt(ss / (a.size + b.size - 2))


def cohens_d(a, b) -> float:
    a, b = _vec(a, "a"), _vec(b, "b")
    s = pooled_sd(a, b)
    if s == 0:
        raise DataError("pooled standard deviation is zero")
    return float((a.mean() - b.mean()) / s)


def pearson(x, y) -> tuple[float, float]:
    x, y = _vec(x, "x", 3), _vec(y, "y", 3)
    if x.size != y.size:
        raise DataError("x and y differ in length")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DataError("pearson correlation undefined for a constant vector")
    r = float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))
    df = x.size - 2
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt(df / (1 - r * r))
    return r, t_two_sided_p(t, df)


def _pvec(p_values) -> np.ndarray:
    p = np.asarray(p_values, dtype=float).ravel()
    if p.size == 0:
        raise DataError("empty p-value list")
    if np.any((p < 0) | (p > 1)) or np.isnan(p).any():
        raise DataError("p-values must lie in [0, 1]")
    return p


def bonferroni(p_values, alpha: float = 0.05):
    p = _pvec(p_values)
    adj = np.minimum(1.0, p * p.size)
    return adj, adj < alpha


def bh_fdr(p_values, q: float = 0.05):
    """Benjamini-Hochberg step-up; returns monotone adjusted p-values and reject flags."""
    p = _pvec(p_values)
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order] * m / np.arange(1, m + 1)
    ranked = np.minimum.accumulate(ranked[::-1])[::-1]
    adj = np.empty(m)
    adj[order] = np.minimum(ranked, 1.0)
    # step-up on the raw thresholds i*q/m
    passed = np.nonzero(p[order] <= q * np.arange(1, m + 1) / m)[0]
    reject = np.zeros(m, dtype=bool)
    if passed.size:
        reject[order[: passed[-1] + 1]] = True
    return adj, reject


@dataclass(frozen=True)
class AnovaResult:
    F: float
    p: float
    df_between: int
    df_within: int
    ms_within: float


def _groups(groups) -> list:
    gs = [_vec(g, f"group {i}") for i, g in enumerate(groups)]
    if len(gs) < 2:
        raise DataError("ANOVA needs at least two groups")
    return gs


def one_way_anova(groups) -> AnovaResult:
    gs = _groups(groups)
    allv = np.concatenate(gs)
    grand = allv.mean()
    ssb = sum(g.size * (g.mean() - grand) ** 2 for g in gs)
    ssw = sum(((g - g.mean()) ** 2).sum() for g in gs)
    dfb, dfw = len(gs) - 1, allv.size - len(gs)
    if ssw == 0:
        raise DataError("zero within-group variance")
    msw = ssw / dfw
    F = (ssb / dfb) / msw
    return AnovaResult(float(F), f_upper_p(float(F), dfb, dfw), dfb, dfw, float(msw))


@dataclass(frozen=True)
class TukeyPair:
    i: int
    j: int
    diff: float
    q: float
    p: float
    reject: bool


def tukey_hsd(groups, alpha: float = 0.05) -> tuple[list, float]:
    """Tukey-Kramer pairwise comparisons; returns (pairs, critical q)."""
    gs = _groups(groups)
    res = one_way_anova(gs)
    k = len(gs)
    q_crit = studentized_range_critical(alpha, k, res.df_within)
    out = []
    for i in range(k):
        for j in range(i + 1, k):
            diff = float(gs[i].mean() - gs[j].mean())
            se = math.sqrt(res.ms_within / 2.0 * (1.0 / gs[i].size + 1.0 / gs[j].size))
            q = abs(diff) / se
            out.append(TukeyPair(i, j, diff, q, studentized_range_upper_p(q, k, res.df_within), q > q_crit))
    return out, q_crit


@dataclass(frozen=True)
class RocResult:
    auc: float
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray


def roc_auc(scores, labels) -> RocResult:
    """Exact AUC (ties count one half) with the empirical ROC curve."""
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).astype(bool).ravel()
    if s.size != y.size:
        raise DataError("scores and labels differ in length")
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC needs both classes")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(s.size)
    sorted_s = s[order]
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    auc = u / (n_pos * n_neg)
    thr = np.unique(s)[::-1]
    tpr = np.array([0.0] + [float((s[y] >= t).sum()) / n_pos for t in thr])
    fpr = np.array([0.0] + [float((s[~y] >= t).sum()) / n_neg for t in thr])
    return RocResult(float(auc), fpr, tpr, np.concatenate([[np.inf], thr]))


def log2_fold_change(a, b) -> float:
    a, b = _vec(a, "a", 1), _vec(b, "b", 1)
    ma, mb = a.mean(), b.mean()
    if ma <= 0 or mb <= 0:
        raise DataError("fold change needs positive group means")
    return float(math.log2(ma / mb))


def hypergeom_enrichment(selected, gene_set, universe) -> float:
    """Upper-tail over-representation p-value P(X >= overlap), computed exactly."""
    selected, gene_set, universe = set(selected), set(gene_set), set(universe)
    if not selected <= universe:
        raise DataError("selected genes must be a subset of the universe")
    if not gene_set <= universe:
        raise DataError("gene set must be a subset of the universe")
    N, K, n = len(universe), len(gene_set), len(selected)
    k = len(selected & gene_set)
    total = math.comb(N, n)
    tail = sum(math.comb(K, i) * math.comb(N - K, n - i) for i in range(k, min(K, n) + 1))
    return float(Fraction(tail, total))
