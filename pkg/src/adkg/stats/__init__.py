"""Statistical battery: tests, corrections, regression, forests, permutation."""

from adkg.stats.forest import ForestParams, RandomForest, gini_importances, k_fold_cv, random_forest_fit, random_forest_predict
from adkg.stats.logistic import elastic_net_logistic, logistic_regression
from adkg.stats.permutation import permutation_test_maxT
from adkg.stats.tables import CorrelationEntry, FeatureStat, Thresholds, correlation_table
from adkg.stats.univariate import (
    bh_fdr,
    bonferroni,
    cohens_d,
    hypergeom_enrichment,
    log2_fold_change,
    one_way_anova,
    pearson,
    roc_auc,
    tukey_hsd,
    welch_t_test,
)

__all__ = [
    "CorrelationEntry", "FeatureStat", "ForestParams", "RandomForest", "Thresholds",
    "bh_fdr", "bonferroni", "cohens_d", "correlation_table", "elastic_net_logistic",
    "gini_importances", "hypergeom_enrichment", "k_fold_cv", "log2_fold_change",
    "logistic_regression", "one_way_anova", "pearson", "permutation_test_maxT",
    "random_forest_fit", "random_forest_predict", "roc_auc", "tukey_hsd", "welch_t_test",
]
