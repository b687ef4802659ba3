import math

import numpy as np
import pytest

from adkg.errors import SchemaError
from adkg.ingest import Group, Modality
from adkg.stats.battery import AnalysisOptions, analyze
from adkg.stats.forest import ForestParams
from adkg.stats.tables import (FeatureStat, Thresholds, apply_selection, correlation_table,
                               read_correlations, read_feature_stats, write_correlations, write_feature_stats)
from adkg.synth import CohortSpec, generate_cohort

TH = Thresholds()


def stat(test, effect, p_adj, method="bonferroni"):
    return FeatureStat("f", Modality.MRI, test, effect, p_adj / 2, p_adj, method)


@pytest.mark.parametrize("s,want", [
    (stat("ttest", 0.6, 0.03), True),
    (stat("ttest", -0.6, 0.03), True),
    (stat("ttest", 0.4, 0.001), False),
    (stat("ttest", 2.0, 0.05), False),
    (stat("logistic_or", 1.6, 0.01), True),
    (stat("logistic_or", 0.5, 0.01), True),
    (stat("logistic_or", 1.2, 0.01), False),
    (stat("log2fc", -2.5, 0.01, "bh"), True),
    (stat("log2fc", 1.9, 0.01, "bh"), False),
])
def test_selection_rule(s, want):
    assert apply_selection([s], TH)[0].selected is want


def test_selected_implies_gate():
    rng = np.random.default_rng(0)
    stats = [stat(t, float(e), float(p)) for t, e, p in
             zip(rng.choice(["ttest", "logistic_or", "log2fc", "perm_maxT"], 200),
                 rng.uniform(0.05, 4, 200), rng.uniform(0, 0.1, 200))]
    for s in apply_selection(stats, TH):
        if s.selected:
            assert s.p_adj < 0.05
            assert abs(s.effect) > 0.5 or s.effect > 1.5 or abs(s.effect) > 2


def test_unknown_test_kind_rejected():
    with pytest.raises(SchemaError):
        FeatureStat("f", Modality.MRI, "wilcoxon", 0.0, 0.1, 0.1, "none")


def test_feature_csv_roundtrip():
    stats = [stat("ttest", 0.123456789, 0.01), FeatureStat("g", Modality.EEG, "perm_maxT", -1.0, 0.001, 0.002,
                                                           "maxT", True)]
    text = write_feature_stats(stats, "config_sha256=x seed=1")
    assert text.splitlines()[1] == "feature,modality,test,effect,p_raw,p_adj,method,selected"
    assert read_feature_stats(text) == stats


def test_correlation_table_symmetric_and_roundtrip():
    spec = CohortSpec(Modality.BIOMARKER, ["a", "b", "c"], {"AD": 50, "CN": 50}, seed=1,
                      target_effects=[{"pair": ("a", "b"), "r": 0.6}])
    cohort = generate_cohort(spec)
    entries = correlation_table(cohort)
    assert len(entries) == 3
    for e in entries:
        x, y = cohort.column(e.feature_a), cohort.column(e.feature_b)
        assert e.r == pytest.approx(np.corrcoef(x, y)[0, 1], abs=1e-12)
        assert e.swapped().r == e.r and e.p_adj >= e.p
    back = read_correlations(write_correlations(entries))
    assert back == entries


def test_missing_values_use_complete_cases():
    spec = CohortSpec(Modality.CLINICAL, ["a", "b"], {"AD": 10, "CN": 10}, seed=2)
    c = generate_cohort(spec)
    vals = np.array(c.values)
    vals[0, 0] = math.nan
    e = correlation_table(c.with_values(vals))[0]
    assert e.n == 19


FAST = dict(forest=ForestParams(n_trees=20, max_depth=5), cv_folds=3)


def test_biomarker_anova_uses_mci_and_ratio_auc():
    spec = CohortSpec(Modality.BIOMARKER, ["Tau_total", "Tau_phospho"], {"AD": 60, "MCI": 40, "CN": 60},
                      seed=3, means={"CN": {"Tau_total": 5.0, "Tau_phospho": 3.0},
                                     "MCI": {"Tau_phospho": 3.5}, "AD": {"Tau_phospho": 4.2}},
                      sds={"Tau_total": 0.3, "Tau_phospho": 0.3}, lognormal=["Tau_total", "Tau_phospho"])
    out = analyze(generate_cohort(spec), AnalysisOptions(log_features=["Tau_total", "Tau_phospho"],
                                                         ratio=["Tau_phospho", "Tau_total"], **FAST))
    assert out.summary["groups"] == ["AD", "MCI", "CN"]
    assert {p["pair"] for p in out.summary["tukey"]["Tau_phospho"]} == {"AD-MCI", "AD-CN", "MCI-CN"}
    assert out.summary["ratio_auc"]["auc"] > 0.9
    tp = next(s for s in out.stats if s.feature == "Tau_phospho")
    assert tp.test == "anova" and tp.selected


def test_clinical_binary_per_unit_and_continuous_per_sd():
    spec = CohortSpec(Modality.CLINICAL, ["Age", "Hypertension"], {"AD": 400, "CN": 400}, seed=4,
                      means={"CN": {"Age": 70.0}}, sds={"Age": 8.0},
                      target_effects=[{"feature": "Age", "d": 0.6}],
                      binary={"Hypertension": {"AD": 0.6, "CN": 0.3}})
    out = analyze(generate_cohort(spec), AnalysisOptions(classify=False))
    ors = out.summary["odds_ratio"]
    assert ors["Hypertension"]["scale"] == "unit" and ors["Age"]["scale"] == "sd"
    assert ors["Age"]["or"] > 1.5
    assert all(s.test == "logistic_or" for s in out.stats)


def test_mri_normalizes_volumes_and_excludes():
    spec = CohortSpec(Modality.MRI, ["BrainVolume", "eTIV", "ASF"], {"AD": 40, "CN": 40}, seed=5,
                      means={"CN": {"BrainVolume": 1100.0, "eTIV": 1500.0, "ASF": 1.2}},
                      sds={"BrainVolume": 60.0, "eTIV": 100.0, "ASF": 0.1},
                      target_effects=[{"feature": "BrainVolume", "d": -1.5}])
    out = analyze(generate_cohort(spec), AnalysisOptions(volume_features=["BrainVolume"], exclude=["ASF"],
                                                         **FAST))
    assert [s.feature for s in out.stats] == ["BrainVolume", "eTIV"]
    assert out.summary["percent_change_vs_cn"]["BrainVolume"] < 0
    assert 0 <= out.summary["classification"]["cv_accuracy_mean"] <= 1


def test_gene_expression_log2fc_and_enrichment():
    genes = [f"G{i}" for i in range(12)]
    spec = CohortSpec(Modality.GENE_EXPRESSION, genes, {"AD": 30, "CN": 30}, seed=6,
                      means={"CN": {g: 5.0 for g in genes}}, sds={g: 0.3 for g in genes},
                      target_effects=[{"feature": g, "d": 7.0} for g in genes[:4]], lognormal=genes)
    out = analyze(generate_cohort(spec), AnalysisOptions(gene_sets={"up": genes[:4], "rest": genes[6:]}))
    sel = {s.feature for s in out.stats if s.selected}
    assert sel == set(genes[:4])
    assert out.summary["enrichment"]["up"]["p"] < out.summary["enrichment"]["rest"]["p"]


def test_imputation_recorded():
    spec = CohortSpec(Modality.MRI, ["v", "w"], {"AD": 10, "CN": 10}, seed=7)
    c = generate_cohort(spec)
    vals = np.array(c.values)
    vals[:8, 1] = math.nan
    vals[0, 0] = math.nan
    out = analyze(c.with_values(vals), AnalysisOptions(classify=False))
    assert out.summary["dropped_for_missingness"] == ["w"]
    assert out.summary["imputed_cells"] == 1
    assert out.summary["n"] == {"AD": 10, "CN": 10}
    assert Group.AD.value in out.summary["n"]
