"""Per-modality statistical battery producing FeatureStats and summaries.

Two-group tests compare AD against CN; MCI rows only enter the ANOVA used
for biomarkers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from adkg.errors import ConvergenceError, DataError
from adkg.ingest import Cohort, Group, Modality, impute, log_transform, normalize_by_etiv
from adkg.stats.forest import ForestParams, gini_importances, k_fold_cv, random_forest_fit, random_forest_predict
from adkg.stats.logistic import elastic_net_logistic, logistic_regression
from adkg.stats.permutation import permutation_test_maxT
from adkg.stats.tables import FeatureStat, Thresholds, apply_selection
from adkg.stats.univariate import (
    bh_fdr,
    bonferroni,
    cohens_d,
    hypergeom_enrichment,
    log2_fold_change,
    one_way_anova,
    roc_auc,
    tukey_hsd,
    welch_t_test,
)

LOGGER = logging.getLogger(__name__)


@dataclass
class AnalysisOptions:
    """Knobs for one modality; unknown modalities fall back to t-tests."""

    volume_features: Sequence[str] = ()
    log_features: Sequence[str] = ()
    exclude: Sequence[str] = ()
    max_missing_frac: float = 0.20
    n_perm: int = 5000
    ratio: Sequence[str] | None = None  # (numerator, denominator) for ROC
    forest: ForestParams = field(default_factory=ForestParams)
    cv_folds: int = 10
    classify: bool = True
    enet_lambda: float = 0.01
    enet_mix: float = 0.5
    gene_sets: Mapping[str, Sequence[str]] = field(default_factory=dict)
    seed: int = 0
    workers: int = 1


@dataclass
class ModalityAnalysis:
    modality: Modality
    stats: list
    summary: dict


def _two_groups(cohort: Cohort):
    cohort.require_two_groups()
    ad, cn = cohort.group_mask(Group.AD), cohort.group_mask(Group.CN)
    if ad.sum() < 2 or cn.sum() < 2:
        raise DataError(f"{cohort.modality.value}: need >= 2 AD and >= 2 CN subjects")
    return ad, cn


def _features(cohort: Cohort, opts: AnalysisOptions) -> list:
    return [f for f in cohort.feature_names if f not in set(opts.exclude)]


def _classify(cohort: Cohort, features, opts: AnalysisOptions) -> dict:
    ad, cn = _two_groups(cohort)
    rows = ad | cn
    X = np.column_stack([cohort.column(f)[rows] for f in features])
    y = ad[rows].astype(int)
    params = opts.forest

    def fit(Xt, yt):
        return random_forest_fit(Xt, yt, params, workers=opts.workers)

    cv = k_fold_cv(fit, random_forest_predict, X, y, k=opts.cv_folds, seed=opts.seed)
    imp = gini_importances(fit(X, y))
    ranked = sorted(zip(features, imp), key=lambda t: (-t[1], t[0]))
    return {
        "cv_accuracy_mean": cv.mean,
        "cv_accuracy_sd": cv.sd,
        "cv_folds": opts.cv_folds,
        "gini_importance": {f: float(v) for f, v in ranked},
    }


def analyze_ttest(cohort: Cohort, opts: AnalysisOptions, adjust: str = "bonferroni") -> ModalityAnalysis:
    ad, cn = _two_groups(cohort)
    feats = _features(cohort, opts)
    raw, skipped = [], []
    for f in feats:
        x = cohort.column(f)
        try:
            res = welch_t_test(x[ad], x[cn])
            d = cohens_d(x[ad], x[cn])
        except DataError as exc:
            skipped.append(f)
            LOGGER.warning("%s: skipping %s (%s)", cohort.modality.value, f, exc)
            continue
        raw.append((f, res, d))
    if not raw:
        raise DataError(f"{cohort.modality.value}: no testable features")
    ps = [r.p for _, r, _ in raw]
    adj = bonferroni(ps)[0] if adjust == "bonferroni" else bh_fdr(ps)[0]
    stats = [FeatureStat(f, cohort.modality, "ttest", d, r.p, float(q), adjust,
                         extra={"t": r.t, "df": r.df})
             for (f, r, d), q in zip(raw, adj)]
    return ModalityAnalysis(cohort.modality, stats, {"skipped": skipped})


def analyze_mri(cohort: Cohort, opts: AnalysisOptions) -> ModalityAnalysis:
    if opts.volume_features:
        cohort = normalize_by_etiv(cohort, opts.volume_features)
    out = analyze_ttest(cohort, opts, "bonferroni")
    means = {}
    ad, cn = _two_groups(cohort)
    for f in _features(cohort, opts):
        x = cohort.column(f)
        if cn.any() and x[cn].mean() != 0:
            means[f] = float(100.0 * (x[ad].mean() - x[cn].mean()) / abs(x[cn].mean()))
    out.summary["percent_change_vs_cn"] = means
    if opts.classify:
        out.summary["classification"] = _classify(cohort, _features(cohort, opts), opts)
    return out


def analyze_eeg(cohort: Cohort, opts: AnalysisOptions) -> ModalityAnalysis:
    ad, cn = _two_groups(cohort)
    feats = _features(cohort, opts)
    rows = ad | cn
    X = np.column_stack([cohort.column(f)[rows] for f in feats])
    res = permutation_test_maxT(X, ad[rows], n_perm=opts.n_perm, seed=opts.seed,
                                feature_names=feats, workers=opts.workers)
    stats = []
    for f, t, p_raw, p_adj in zip(res.features, res.t_obs, res.p_raw, res.p_adj):
        x = cohort.column(f)
        stats.append(FeatureStat(f, Modality.EEG, "perm_maxT", cohens_d(x[ad], x[cn]), float(p_raw),
                                 float(p_adj), "maxT", extra={"t": float(t)}))
    summary = {"n_perm": res.n_relabelings, "exhaustive": res.exhaustive, "excluded": list(res.excluded)}
    pct = {}
    for f in feats:
        if f.endswith("_mean"):
            x = cohort.column(f)
            pct[f] = float(100.0 * (x[ad].mean() - x[cn].mean()) / x[cn].mean())
    summary["percent_change_vs_cn_montage_avg"] = pct
    if opts.classify:
        summary["classification"] = _classify(cohort, feats, opts)
    return ModalityAnalysis(Modality.EEG, stats, summary)


def analyze_biomarker(cohort: Cohort, opts: AnalysisOptions) -> ModalityAnalysis:
    ad, cn = _two_groups(cohort)
    raw = cohort
    if opts.log_features:
        cohort = log_transform(cohort, opts.log_features)
    feats = _features(cohort, opts)
    present = [g for g in Group if cohort.group_mask(g).sum() >= 2]
    anova_p, effects, tukey = [], [], {}
    for f in feats:
        x = cohort.column(f)
        groups = [x[cohort.group_mask(g)] for g in present]
        a = one_way_anova(groups)
        pairs, qcrit = tukey_hsd(groups)
        tukey[f] = [{"pair": f"{present[p.i].value}-{present[p.j].value}", "diff": p.diff, "q": p.q,
                     "p": p.p, "reject": bool(p.reject)} for p in pairs]
        anova_p.append(a.p)
        effects.append(cohens_d(x[ad], x[cn]))
    adj, _ = bonferroni(anova_p)
    stats = [FeatureStat(f, Modality.BIOMARKER, "anova", d, p, float(q), "bonferroni")
             for f, d, p, q in zip(feats, effects, anova_p, adj)]
    fold = {}
    for f in feats:
        x = raw.column(f)
        if x[ad].mean() > 0 and x[cn].mean() > 0:
            fold[f] = float(x[ad].mean() / x[cn].mean())
    summary = {"tukey": tukey, "fold_change_ad_vs_cn": fold, "groups": [g.value for g in present]}
    if opts.ratio:
        num, den = opts.ratio
        ratio = raw.column(num) / raw.column(den)
        rows = ad | cn
        roc = roc_auc(ratio[rows], ad[rows])
        summary["ratio_auc"] = {"ratio": f"{num}/{den}", "auc": roc.auc}
    return ModalityAnalysis(Modality.BIOMARKER, stats, summary)


def analyze_clinical(cohort: Cohort, opts: AnalysisOptions) -> ModalityAnalysis:
    ad, cn = _two_groups(cohort)
    feats = _features(cohort, opts)
    rows = ad | cn
    X = np.column_stack([cohort.column(f)[rows] for f in feats])
    y = ad[rows].astype(int)
    # continuous columns per SD, 0/1 columns per unit
    binary = np.array([set(np.unique(X[:, j])) <= {0.0, 1.0} for j in range(X.shape[1])])
    Z = X.copy()
    Z[:, ~binary] = (X[:, ~binary] - X[:, ~binary].mean(axis=0)) / X[:, ~binary].std(axis=0)
    fit = logistic_regression(Z, y, names=feats)
    ors = fit.odds_ratios[1:]
    ci = fit.conf_int()[1:]
    pw = fit.wald_p[1:]
    adj, _ = bonferroni(pw)
    stats = [FeatureStat(f, Modality.CLINICAL, "logistic_or", float(o), float(p), float(q), "bonferroni",
                         extra={"ci": (float(lo), float(hi))})
             for f, o, p, q, (lo, hi) in zip(feats, ors, pw, adj, ci)]
    summary = {
        "odds_ratio": {f: {"or": float(o), "ci95": [float(lo), float(hi)], "scale": "unit" if b else "sd"}
                       for f, o, (lo, hi), b in zip(feats, ors, ci, binary)},
    }
    try:
        en = elastic_net_logistic(X, y, opts.enet_lambda, opts.enet_mix)
        summary["elastic_net"] = {"lambda": opts.enet_lambda, "mix": opts.enet_mix,
                                  "beta_std": {f: float(b) for f, b in zip(feats, en.beta_std[1:])}}
    except ConvergenceError as exc:
        summary["elastic_net"] = {"error": str(exc)}
    if opts.classify:
        summary["classification"] = _classify(cohort, feats, opts)
    return ModalityAnalysis(Modality.CLINICAL, stats, summary)


def analyze_gene_expression(cohort: Cohort, opts: AnalysisOptions) -> ModalityAnalysis:
    ad, cn = _two_groups(cohort)
    feats = _features(cohort, opts)
    lfc, ps = [], []
    for f in feats:
        x = cohort.column(f)
        lfc.append(log2_fold_change(x[ad], x[cn]))
        ps.append(welch_t_test(np.log2(x[ad]), np.log2(x[cn])).p)
    adj, _ = bh_fdr(ps)
    stats = [FeatureStat(f, Modality.GENE_EXPRESSION, "log2fc", l, p, float(q), "bh")
             for f, l, p, q in zip(feats, lfc, ps, adj)]
    summary = {}
    if opts.gene_sets:
        universe = set(feats)
        de = {s.feature for s in stats if s.p_adj < 0.05 and abs(s.effect) > 2.0}
        names = sorted(opts.gene_sets)
        pvals = [hypergeom_enrichment(de, set(opts.gene_sets[n]) & universe, universe) for n in names]
        padj, _ = bh_fdr(pvals)
        summary["enrichment"] = {n: {"p": p, "p_adj": float(q), "overlap": len(de & set(opts.gene_sets[n]))}
                                 for n, p, q in zip(names, pvals, padj)}
    return ModalityAnalysis(Modality.GENE_EXPRESSION, stats, summary)


ANALYZERS = {
    Modality.MRI: analyze_mri,
    Modality.EEG: analyze_eeg,
    Modality.BIOMARKER: analyze_biomarker,
    Modality.CLINICAL: analyze_clinical,
    Modality.GENE_EXPRESSION: analyze_gene_expression,
}


def analyze(cohort: Cohort, opts: AnalysisOptions, thresholds: Thresholds = Thresholds()) -> ModalityAnalysis:
    result = impute(cohort, opts.max_missing_frac)
    out = ANALYZERS[cohort.modality](result.cohort, opts)
    out.stats = apply_selection(out.stats, thresholds)
    out.summary["dropped_for_missingness"] = list(result.dropped)
    out.summary["imputed_cells"] = result.filled
    out.summary["n"] = result.cohort.group_counts()
    return out
