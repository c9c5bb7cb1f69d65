"""Query selection: top-scoring, uniform random, and greedy input-space diversity.

All selectors return dataset row indices drawn from the pool, never more than
the pool holds, with deterministic tie-breaking toward the lower index.
"""

import numpy as np
from scipy.spatial.distance import cdist

from .validation import as_float_matrix, as_index_array, check_positive_int


def select_top_m(scores, m, pool_idx=None):
    """Indices of the m highest scores, descending; ties go to the earlier row.

    ``scores`` is aligned with ``pool_idx`` when given, otherwise positions
    0..n-1 are returned.
    """
    check_positive_int(m, "m")
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("scores must be a non-empty 1-D array")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    order = np.argsort(-scores, kind="stable")[: min(m, scores.size)]
    if pool_idx is None:
        return order.astype(np.intp)
    pool_idx = as_index_array(pool_idx, "pool_idx")
    if pool_idx.shape[0] != scores.shape[0]:
        raise ValueError("pool_idx and scores must be aligned")
    return pool_idx[order]


def random_select(pool_idx, m, seed):
    """Uniform sample without replacement, deterministic for a given seed."""
    check_positive_int(m, "m")
    pool_idx = as_index_array(pool_idx, "pool_idx")
    if pool_idx.size == 0:
        raise ValueError("pool is empty")
    rng = np.random.default_rng(seed)
    return rng.permutation(pool_idx)[: min(m, pool_idx.size)]


def gsx_select(encoded_features, labelled_idx, pool_idx, m):
    """Greedy diversity in feature space.

    With no labelled rows the first pick is the pool point nearest the pool
    centroid; every subsequent pick maximizes the minimum Euclidean distance
    to the labelled rows plus everything picked so far.
    """
    check_positive_int(m, "m")
    X = as_float_matrix(encoded_features, "encoded_features", require_finite=True)
    pool_idx = as_index_array(pool_idx, "pool_idx")
    labelled_idx = as_index_array(labelled_idx, "labelled_idx")
    if pool_idx.size == 0:
        raise ValueError("pool is empty")

    P = X[pool_idx]
    m_eff = min(m, pool_idx.size)
    chosen = []
    if labelled_idx.size == 0:
        centroid = P.mean(axis=0)
        first = int(np.argmin(np.linalg.norm(P - centroid, axis=1)))
        chosen.append(first)
        min_dist = np.linalg.norm(P - P[first], axis=1)
    else:
        min_dist = cdist(P, X[labelled_idx]).min(axis=1)

    while len(chosen) < m_eff:
        available = np.ones(pool_idx.size, dtype=bool)
        available[chosen] = False
        cand = np.flatnonzero(available)
        pick = int(cand[np.argmax(min_dist[cand])])
        chosen.append(pick)
        min_dist = np.minimum(min_dist, np.linalg.norm(P - P[pick], axis=1))
    return pool_idx[chosen]
