"""Boosted decision trees with single-model uncertainty estimates, wired into
pool-based active learning with optional pseudo-labelling."""

__version__ = "0.1.0"

from .boosting import (
    GBTClassifier,
    GBTRegressor,
    TrainParams,
    load_model,
    make_estimator,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .ceal import CealConfig, PseudoLabelSet, filter_classification, filter_regression
from .data import (
    ColumnSchema,
    Dataset,
    gen_blobs,
    gen_friedman1,
    load_csv,
    load_schema,
    save_csv,
    save_schema,
    train_test_split,
)
from .encoding import TableEncoder
from .harness import (
    DatasetSource,
    ExperimentConfig,
    IterationRecord,
    LearningCurve,
    aggregate_seeds,
    run_experiment,
    run_seeds,
    write_aggregate_csv,
    write_curves_csv,
)
from .metrics import accuracy, auc, auc_macro, mse, r2
from .sampling import gsx_select, random_select, select_top_m
from .tree import Tree
from .uncertainty import (
    entropy,
    ibug_affinities,
    ibug_uncertainty,
    staged_std,
    ve_classification,
    ve_regression_std,
)

__all__ = [
    "GBTClassifier", "GBTRegressor", "TrainParams", "load_model",
    "make_estimator", "model_from_dict", "model_to_dict", "save_model",
    "CealConfig", "PseudoLabelSet", "filter_classification", "filter_regression",
    "ColumnSchema", "Dataset", "gen_blobs", "gen_friedman1", "load_csv",
    "load_schema", "save_csv", "save_schema", "train_test_split",
    "TableEncoder",
    "DatasetSource", "ExperimentConfig", "IterationRecord", "LearningCurve",
    "aggregate_seeds", "run_experiment", "run_seeds", "write_aggregate_csv",
    "write_curves_csv",
    "accuracy", "auc", "auc_macro", "mse", "r2",
    "gsx_select", "random_select", "select_top_m",
    "Tree",
    "entropy", "ibug_affinities", "ibug_uncertainty", "staged_std",
    "ve_classification", "ve_regression_std",
    "__version__",
]
