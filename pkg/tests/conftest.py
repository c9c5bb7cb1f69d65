import numpy as np

from alboost.boosting import GBTRegressor, model_from_dict
from alboost.tree import Tree


def dataset_matrix(dataset, idx=None):
    """Stack a dataset's numeric feature columns into a plain (n, d) matrix."""
    X = np.column_stack([dataset.columns[n] for n in dataset.feature_names])
    return X if idx is None else X[idx]


def constant_stage_regressor(base, increments):
    """Hand-built regression model: stage t adds the constant increments[t]."""
    doc = {
        "loss": "squared",
        "params": GBTRegressor().get_params(),
        "n_features": 1,
        "base_score": [float(base)],
        "stages": [[Tree.leaf(v).to_dict()] for v in increments],
    }
    return model_from_dict(doc)


def walk_tree(doc, x):
    """Independent recursive evaluation of a serialized tree on one row."""
    node = 0
    while doc["feature"][node] >= 0:
        if x[doc["feature"][node]] < doc["threshold"][node]:
            node = doc["left"][node]
        else:
            node = doc["right"][node]
    return doc["value"][node], doc["leaf_id"][node]
