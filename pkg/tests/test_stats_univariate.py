import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from adkg.errors import DataError
from adkg.stats.distributions import f_upper_p
from adkg.stats.univariate import (bh_fdr, bonferroni, cohens_d, hypergeom_enrichment, log2_fold_change,
                                   one_way_anova, pearson, roc_auc, tukey_hsd, welch_t_test)

samples = st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=15).filter(lambda v: np.ptp(v) > 1e-3)


def f_sf_by_quadrature(f, d1, d2):
    """Upper tail of the F distribution from its density, integrated numerically."""
    lognorm = (math.lgamma((d1 + d2) / 2) - math.lgamma(d1 / 2) - math.lgamma(d2 / 2)
               + (d1 / 2) * math.log(d1 / d2))

    def dens(x):
        return math.exp(lognorm + (d1 / 2 - 1) * math.log(x) - ((d1 + d2) / 2) * math.log1p(d1 * x / d2))

    return integrate.quad(dens, f, math.inf, epsabs=1e-13, epsrel=1e-12)[0]


# welch

def test_welch_identical():
    r = welch_t_test([1, 2, 3], [1, 2, 3])
    assert r.t == 0 and r.p == 1.0


def test_welch_closed_form_df2():
    r = welch_t_test([1, 2], [3, 4])
    assert r.t == pytest.approx(-2.828427, abs=1e-6)
    assert r.df == pytest.approx(2.0)
    # t CDF at df=2 has the closed form P(|T|>t) = 1 - t / sqrt(2 + t^2)
    assert r.p == pytest.approx(1 - math.sqrt(8) / math.sqrt(10), abs=1e-10)
    assert r.p == pytest.approx(0.106, abs=1e-3)


def test_welch_degenerate():
    with pytest.raises(DataError, match="degenerate"):
        welch_t_test([5, 5], [5, 5])


@settings(max_examples=80, deadline=None)
@given(samples, samples, st.floats(-1e3, 1e3))
def test_welch_shift_invariant(a, b, c):
    p0 = welch_t_test(a, b).p
    p1 = welch_t_test(np.add(a, c), np.add(b, c)).p
    assert p1 == pytest.approx(p0, rel=1e-6, abs=1e-9)


# cohen's d

def test_cohens_d_examples():
    assert cohens_d([1, 2, 3], [1, 2, 3]) == 0
    assert cohens_d([2, 4], [0, 2]) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(DataError):
        cohens_d([1, 1], [1, 1])


@settings(max_examples=80, deadline=None)
@given(samples, samples, st.floats(0.01, 100))
def test_cohens_d_antisymmetric_and_scale_free(a, b, k):
    d = cohens_d(a, b)
    assert cohens_d(b, a) == pytest.approx(-d, abs=1e-12)
    assert cohens_d(np.multiply(a, k), np.multiply(b, k)) == pytest.approx(d, rel=1e-7, abs=1e-9)


# pearson

def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6])[0] == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1])[0] == pytest.approx(-1.0)
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4])[0] == pytest.approx(0.8, abs=1e-12)
    with pytest.raises(DataError, match="constant"):
        pearson([1, 1, 1], [1, 2, 3])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=4, max_size=20),
       st.floats(0.1, 10), st.floats(-50, 50))
def test_pearson_affine(pairs, slope, shift):
    x, y = np.array(pairs).T
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    r = pearson(x, y)[0]
    assert pearson(slope * x + shift, y)[0] == pytest.approx(r, abs=1e-9)
    assert pearson(-slope * x + shift, y)[0] == pytest.approx(-r, abs=1e-9)


# multiple testing

def test_bonferroni_examples():
    adj, rej = bonferroni([0.03])
    assert adj[0] == 0.03
    adj, rej = bonferroni([0.01, 0.2], 0.05)
    assert list(adj) == pytest.approx([0.02, 0.4]) and list(rej) == [True, False]
    assert bonferroni([0.9, 0.5, 0.5])[0][0] == 1.0
    with pytest.raises(DataError):
        bonferroni([])


def test_bh_examples():
    adj, rej = bh_fdr([0.01, 0.02, 0.03, 0.04], 0.05)
    assert rej.all()
    assert bh_fdr([0.3])[0][0] == 0.3
    with pytest.raises(DataError):
        bh_fdr([])


def test_bh_adjusted_monotone_and_at_least_raw():
    p = np.random.default_rng(0).uniform(size=50) ** 3
    adj, _ = bh_fdr(p)
    order = np.argsort(p)
    assert np.all(np.diff(adj[order]) >= -1e-15)
    assert np.all(adj >= p)


def test_bh_rejects_superset_of_bonferroni():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        m = int(rng.integers(1, 40))
        p = rng.uniform(size=m) ** rng.uniform(0.5, 6)
        alpha = float(rng.choice([0.01, 0.05, 0.1]))
        bh = bh_fdr(p, alpha)[1]
        bf = bonferroni(p, alpha)[1]
        assert np.all(bh[bf])


# anova / tukey

def test_anova_examples():
    r = one_way_anova([[1, 2, 3]] * 3)
    assert r.F == 0 and r.p == 1.0
    r = one_way_anova([[1, 2], [3, 4], [5, 6]])
    assert r.F == pytest.approx(16.0)
    assert r.p == pytest.approx(f_sf_by_quadrature(16.0, 2, 3), abs=1e-9)
    with pytest.raises(DataError):
        one_way_anova([[1, 2, 3]])
    with pytest.raises(DataError):
        one_way_anova([[1, 1], [2, 2]])


@pytest.mark.parametrize("f,d1,d2", [(0.5, 3, 7), (2.2, 4, 30), (7.0, 1, 12)])
def test_f_tail_against_quadrature(f, d1, d2):
    assert f_upper_p(f, d1, d2) == pytest.approx(f_sf_by_quadrature(f, d1, d2), abs=1e-9)


def test_tukey_identical_groups():
    pairs, _ = tukey_hsd([[1, 2, 3]] * 3)
    assert all(p.q == 0 and not p.reject for p in pairs)


def test_tukey_critical_value_by_simulation():
    _, qcrit = tukey_hsd([np.arange(4.0), np.arange(4.0) + 1, np.arange(5.0)])
    # groups of sizes 4, 4, 5 give df = 10
    rng = np.random.default_rng(99)
    z = rng.standard_normal((1_000_000, 3))
    s = np.sqrt(rng.chisquare(10, 1_000_000) / 10)
    q_mc = np.quantile(np.ptp(z, axis=1) / s, 0.95)
    assert qcrit == pytest.approx(3.88, abs=0.05)
    assert qcrit == pytest.approx(q_mc, abs=0.03)


def test_tukey_two_groups_matches_t():
    rng = np.random.default_rng(5)
    a, b = rng.standard_normal(8), rng.standard_normal(8) + 1
    b = (b - b.mean()) / b.std(ddof=1) * a.std(ddof=1) + b.mean()  # equal variances
    pairs, _ = tukey_hsd([a, b])
    assert pairs[0].q == pytest.approx(abs(welch_t_test(a, b).t) * math.sqrt(2), abs=1e-9)


# roc

def brute_auc(pos, neg):
    wins = sum((p > n) + 0.5 * (p == n) for p, n in itertools.product(pos, neg))
    return wins / (len(pos) * len(neg))


def test_roc_examples():
    assert roc_auc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]).auc == 1.0
    assert roc_auc([0.8, 0.3, 0.3, 0.1], [1, 1, 0, 0]).auc == 0.875
    with pytest.raises(DataError):
        roc_auc([0.1, 0.2], [1, 1])


def test_roc_random_labels_near_half():
    rng = np.random.default_rng(12)
    s = rng.standard_normal(10000)
    y = rng.permutation(np.arange(10000) % 2)
    assert 0.47 <= roc_auc(s, y).auc <= 0.53


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=2, max_size=12), st.lists(st.integers(0, 6), min_size=1, max_size=12))
def test_roc_matches_enumeration_and_monotone_invariance(pos, neg):
    s = np.array(pos + neg, dtype=float)
    y = [1] * len(pos) + [0] * len(neg)
    r = roc_auc(s, y)
    assert r.auc == pytest.approx(brute_auc(pos, neg), abs=1e-12)
    assert roc_auc(np.exp(s) * 3 - 1, y).auc == pytest.approx(r.auc, abs=1e-12)
    assert r.fpr[-1] == 1.0 and r.tpr[-1] == 1.0


# fold change, enrichment

def test_log2fc():
    assert log2_fold_change([8, 8], [2, 2]) == 2.0
    assert log2_fold_change([3, 3], [3, 3]) == 0.0
    assert log2_fold_change([3], [12]) == -2.0
    with pytest.raises(DataError):
        log2_fold_change([-1, 0], [1, 2])


def test_hypergeom():
    u = set(range(10))
    assert hypergeom_enrichment({5, 6}, {0, 1}, u) == 1.0
    assert hypergeom_enrichment({0, 1, 2, 3}, {0, 1, 2, 3, 4}, u) == pytest.approx(5 / 210)
    assert hypergeom_enrichment(u, {0, 1, 2}, u) == 1.0
    with pytest.raises(DataError):
        hypergeom_enrichment({11}, {0}, u)
