"""Per-row uncertainty scores from a single boosted model.

Three families, all usable as active-learning query scores:

* predictive entropy of the final class distribution;
* spread of the staged (prefix) predictions across boosting iterations;
* virtual ensembles built from trailing model prefixes, giving either a
  total/data/knowledge entropy decomposition (classification) or a member
  standard deviation (regression);
* instance-based variance: the variance of the training targets of the k
  training rows that co-land in the most leaves with the query row.
"""

from collections import namedtuple

import numpy as np
from scipy import sparse

from .validation import check_positive_int

_ENTROPY_TOL = 1e-6


def entropy(probs):
    """Shannon entropy in nats, row-wise for a matrix; 0*log(0) counts as 0."""
    p = np.asarray(probs, dtype=np.float64)
    squeeze = p.ndim == 1
    if squeeze:
        p = p[None, :]
    if p.ndim != 2 or p.shape[1] < 1:
        raise ValueError("probs must be a vector or matrix of probabilities")
    if np.any(p < -_ENTROPY_TOL) or np.any(np.abs(p.sum(axis=1) - 1.0) > _ENTROPY_TOL):
        raise ValueError("rows of probs must be distributions summing to 1")
    p = np.clip(p, 0.0, None)
    terms = np.zeros_like(p)
    mask = p > 0
    terms[mask] = p[mask] * np.log(p[mask])
    # inputs a hair past exact normalization may dip fractionally below 0
    h = np.maximum(-terms.sum(axis=1), 0.0)
    return float(h[0]) if squeeze else h


def staged_std(model, X):
    """Spread of predictions over stage prefixes 1..T (sample std, divisor T-1).

    Classification uses the per-class probability paths averaged over classes,
    which for two classes equals the std of the positive-class probability.
    """
    T = model.n_stages_
    if T < 2:
        raise ValueError("staged_std needs a model with at least 2 stages")
    if hasattr(model, "staged_predict_proba"):
        probs = model.staged_predict_proba(X)
        return probs.std(axis=0, ddof=1).mean(axis=1)
    return model.staged_predict(X).std(axis=0, ddof=1)


VEClassification = namedtuple("VEClassification", ["total", "data", "knowledge"])


def ve_classification(model, X, k):
    """Entropy decomposition over k virtual-ensemble members.

    total = entropy of the mean member distribution, data = mean member
    entropy, knowledge = total - data (clamped to 0 when a hair negative).
    """
    members = model.virtual_ensemble_proba(X, k)
    mean_p = members.mean(axis=0)
    total = entropy(mean_p)
    data = np.mean([entropy(members[j]) for j in range(members.shape[0])], axis=0)
    knowledge = total - data
    knowledge = np.where((knowledge < 0) & (knowledge >= -1e-12), 0.0, knowledge)
    return VEClassification(total, data, knowledge)


def ve_regression_std(model, X, k):
    """Std of k virtual-ensemble member predictions (divisor k-1)."""
    members = model.virtual_ensemble(X, k)
    if members.shape[0] < 2:
        raise ValueError(
            "regression virtual ensemble needs at least 2 members; "
            "train more stages or raise k")
    return members.std(axis=0, ddof=1)


def _leaf_onehot(leaves, offsets, n_slots):
    n, t = leaves.shape
    rows = np.repeat(np.arange(n), t)
    cols = (leaves.astype(np.int64) + offsets[None, :]).ravel()
    data = np.ones(rows.shape[0], dtype=np.int32)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n, n_slots))


def ibug_affinities(train_leaves, test_leaves):
    """Affinity matrix (n_test, n_train): number of trees sharing a leaf."""
    train_leaves = np.asarray(train_leaves)
    test_leaves = np.asarray(test_leaves)
    if train_leaves.ndim != 2 or test_leaves.ndim != 2:
        raise ValueError("leaf matrices must be 2-D (rows, trees)")
    if train_leaves.shape[1] != test_leaves.shape[1]:
        raise ValueError("train and test leaf matrices disagree on tree count")
    slots = np.maximum(train_leaves.max(axis=0), test_leaves.max(axis=0)) + 1
    offsets = np.concatenate([[0], np.cumsum(slots[:-1])]).astype(np.int64)
    n_slots = int(offsets[-1] + slots[-1])
    A = _leaf_onehot(train_leaves, offsets, n_slots)
    B = _leaf_onehot(test_leaves, offsets, n_slots)
    return np.asarray((B @ A.T).toarray())


def ibug_uncertainty(train_leaves, y_train, test_leaves, k):
    """Variance (divisor k-1) of the targets of the k highest-affinity train rows.

    Affinity ties are broken toward the lower training-row index. k is clamped
    to the number of training rows, which must be at least 2.
    """
    check_positive_int(k, "k", minimum=2)
    y_train = np.asarray(y_train, dtype=np.float64)
    n_train = y_train.shape[0]
    if n_train < 2:
        raise ValueError("instance-based uncertainty needs at least 2 training rows")
    k_eff = min(k, n_train)
    aff = ibug_affinities(train_leaves, test_leaves)
    order = np.argsort(-aff, axis=1, kind="stable")[:, :k_eff]
    return y_train[order].var(axis=1, ddof=1)
