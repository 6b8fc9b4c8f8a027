"""Vertical dataset merging via imputation, with a PCA variant for large
non-shared feature blocks, linear-model benchmarks, and a randomized
checker for the merged-SSE inequality."""

from .data import (
    CATEGORICAL,
    NUMERIC,
    DataMatrix,
    Dataset,
    FeatureSet,
    LabelVector,
    align,
    feature_difference,
    feature_intersection,
    feature_union,
    hstack,
    select_features,
    take_rows,
    vstack,
    vstack_labels,
)
from .impute import ImputationResult, ImputerConfig, impute, impute_knn, impute_mean, impute_soft
from .merge import (
    MergedDataset,
    MergedSplit,
    MergeReport,
    SequentialMergeResult,
    SplitDataset,
    comimp_merge,
    pca_comimp_merge,
    sequential_merge,
)
from .models import (
    ClassifierFit,
    LinearRegressionFit,
    TrainConfig,
    accuracy,
    fit_linear_svm,
    fit_logistic,
    fit_ols,
    mse,
    predict,
    sse,
)
from .pca import PcaModel, RankRule, pca_fit, pca_project, pca_reconstruct

__version__ = "0.1.0"

__all__ = [
    "CATEGORICAL",
    "NUMERIC",
    "DataMatrix",
    "Dataset",
    "FeatureSet",
    "LabelVector",
    "align",
    "feature_difference",
    "feature_intersection",
    "feature_union",
    "hstack",
    "select_features",
    "take_rows",
    "vstack",
    "vstack_labels",
    "ImputationResult",
    "ImputerConfig",
    "impute",
    "impute_knn",
    "impute_mean",
    "impute_soft",
    "MergedDataset",
    "MergedSplit",
    "MergeReport",
    "SequentialMergeResult",
    "SplitDataset",
    "comimp_merge",
    "pca_comimp_merge",
    "sequential_merge",
    "ClassifierFit",
    "LinearRegressionFit",
    "TrainConfig",
    "accuracy",
    "fit_linear_svm",
    "fit_logistic",
    "fit_ols",
    "mse",
    "predict",
    "sse",
    "PcaModel",
    "RankRule",
    "pca_fit",
    "pca_project",
    "pca_reconstruct",
    "__version__",
]
