"""Evaluation metrics. AUC returns None when undefined instead of raising,
so a learning-curve run can record it as missing and continue.
"""

import numpy as np
from scipy.stats import rankdata

R2_UNDEFINED = -1e18


def _aligned(a, b, name_a, name_b):
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.size == 0:
        raise ValueError(f"{name_a} is empty")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"{name_a} and {name_b} must be the same length")
    return a, b


def accuracy(preds, labels):
    preds, labels = _aligned(preds, labels, "preds", "labels")
    return float(np.mean(preds == labels))


def mse(preds, targets):
    preds, targets = _aligned(preds, targets, "preds", "targets")
    return float(np.mean((preds - targets) ** 2))


def r2(preds, targets):
    """1 - SS_res/SS_tot; 0 when both are zero, large negative sentinel when
    only SS_tot is zero."""
    preds, targets = _aligned(preds, targets, "preds", "targets")
    ss_res = float(np.sum((targets - preds) ** 2))
    ss_tot = float(np.sum((targets - np.mean(targets)) ** 2))
    if ss_tot == 0.0:
        return 0.0 if ss_res == 0.0 else R2_UNDEFINED
    return 1.0 - ss_res / ss_tot


def auc(scores, binary_labels):
    """Rank-statistic AUC with half credit for ties; None if one class absent."""
    scores, labels = _aligned(scores, binary_labels, "scores", "binary_labels")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("binary_labels must be 0/1")
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores, method="average")
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auc_macro(per_class_scores, labels):
    """Unweighted mean of one-vs-rest AUCs over the classes present in labels."""
    scores = np.asarray(per_class_scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if scores.ndim != 2 or scores.shape[0] == 0:
        raise ValueError("per_class_scores must be a non-empty (rows, classes) matrix")
    if scores.shape[0] != labels.shape[0]:
        raise ValueError("per_class_scores and labels must be aligned")
    present = np.unique(labels)
    if present.size < 2:
        return None
    values = [auc(scores[:, c], (labels == c).astype(np.float64)) for c in present]
    return float(np.mean(values))
