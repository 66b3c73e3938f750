from .features import INTERCEPT, FeatureMatrix, FeatureSpec, build_feature_matrix
from .kmeans import ElbowReport, KMeansResult, kmeans, kmeans_sweep
from .logistic import LogisticFit, aic, fit_logistic
from .metrics import ClassificationMetrics, ConfusionMatrix, RocCurve, classification_metrics, roc_auc
from .ols import RegressionFit, fit_ols, significance_stars
from .resample import resample, resample_indices
from .selection import RemovalStep, backward_stepwise_aic, pvalue_prune
from .tables import fit_to_dict, fit_to_json, logistic_table, regression_table

__all__ = [
    "INTERCEPT", "FeatureMatrix", "FeatureSpec", "build_feature_matrix",
    "ElbowReport", "KMeansResult", "kmeans", "kmeans_sweep",
    "LogisticFit", "aic", "fit_logistic",
    "ClassificationMetrics", "ConfusionMatrix", "RocCurve", "classification_metrics", "roc_auc",
    "RegressionFit", "fit_ols", "significance_stars",
    "resample", "resample_indices",
    "RemovalStep", "backward_stepwise_aic", "pvalue_prune",
    "fit_to_dict", "fit_to_json", "logistic_table", "regression_table",
]
