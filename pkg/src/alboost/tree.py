"""Axis-aligned binary regression trees grown on first/second-order gradients.

Trees are stored as flat parallel arrays. An internal node routes a row left
when ``x[feature] < threshold``; leaves carry an additive value (already
scaled by the learning rate) and a stable leaf id assigned in depth-first
construction order, left child first.
"""

import numpy as np


class Tree:
    def __init__(self, feature, threshold, left, right, value, leaf_id):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.value = np.asarray(value, dtype=np.float64)
        self.leaf_id = np.asarray(leaf_id, dtype=np.int32)

    @classmethod
    def leaf(cls, value):
        """Single-leaf tree predicting a constant."""
        return cls([-1], [0.0], [-1], [-1], [float(value)], [0])

    @classmethod
    def stump(cls, feature, threshold, left_value, right_value):
        """One split: rows with x[feature] < threshold get leaf 0, others leaf 1."""
        return cls(
            [int(feature), -1, -1],
            [float(threshold), 0.0, 0.0],
            [1, -1, -1],
            [2, -1, -1],
            [0.0, float(left_value), float(right_value)],
            [-1, 0, 1],
        )

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    @property
    def n_leaves(self):
        return int(np.sum(self.feature < 0))

    def depth(self):
        def walk(node):
            if self.feature[node] < 0:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))

        return walk(0)

    def _descend(self, X):
        node = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            feat = self.feature[node]
            rows = np.flatnonzero(feat >= 0)
            if rows.size == 0:
                return node
            cur = node[rows]
            go_left = X[rows, feat[rows]] < self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])

    def predict(self, X):
        return self.value[self._descend(X)]

    def apply(self, X):
        """Leaf id each row falls into."""
        return self.leaf_id[self._descend(X)]

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "leaf_id": self.leaf_id.tolist(),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["feature"], doc["threshold"], doc["left"], doc["right"],
                   doc["value"], doc["leaf_id"])


def candidate_thresholds(x, max_thresholds):
    """Split candidates for one feature: midpoints between consecutive quantile knots.

    Uses all unique-value midpoints when few enough, otherwise at most
    ``max_thresholds`` midpoints between evenly spaced quantiles.
    """
    unique = np.unique(x)
    if unique.size <= 1:
        return np.empty(0, dtype=np.float64)
    if unique.size - 1 <= max_thresholds:
        knots = unique
    else:
        qs = np.linspace(0.0, 1.0, max_thresholds + 1)
        knots = np.unique(np.quantile(x, qs))
    return (knots[:-1] + knots[1:]) / 2.0


class _TreeBuilder:
    """Greedy depth-limited grower over pre-binned columns.

    ``bins[i, f]`` is the number of candidate thresholds <= x, so a split at
    candidate j sends exactly the rows with ``bins <= j`` left, matching the
    raw-feature routing rule ``x < threshold``.
    """

    def __init__(self, bins, thresholds, grad, hess, max_depth, min_samples_leaf,
                 learning_rate):
        self.bins = bins
        self.thresholds = thresholds
        self.grad = grad
        self.hess = hess
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.learning_rate = learning_rate
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []
        self.leaf_id = []
        self._next_leaf = 0

    def build(self):
        self._grow(np.arange(self.bins.shape[0]), 0)
        return Tree(self.feature, self.threshold, self.left, self.right,
                    self.value, self.leaf_id)

    def _new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        self.leaf_id.append(-1)
        return len(self.feature) - 1

    def _make_leaf(self, node, rows):
        g = self.grad[rows].sum()
        h = self.hess[rows].sum()
        self.value[node] = -g / (h + 1.0) * self.learning_rate
        self.leaf_id[node] = self._next_leaf
        self._next_leaf += 1

    def _grow(self, rows, depth):
        node = self._new_node()
        if depth >= self.max_depth or rows.size < 2 * self.min_samples_leaf:
            self._make_leaf(node, rows)
            return node
        split = self._best_split(rows)
        if split is None:
            self._make_leaf(node, rows)
            return node
        feature, thr_idx = split
        self.feature[node] = feature
        self.threshold[node] = float(self.thresholds[feature][thr_idx])
        go_left = self.bins[rows, feature] <= thr_idx
        left = self._grow(rows[go_left], depth + 1)
        right = self._grow(rows[~go_left], depth + 1)
        self.left[node] = left
        self.right[node] = right
        return node

    def _best_split(self, rows):
        g_all = self.grad[rows]
        h_all = self.hess[rows]
        g_tot = g_all.sum()
        h_tot = h_all.sum()
        parent_score = g_tot * g_tot / (h_tot + 1.0)

        best_gain = 0.0
        best = None
        # fixed ascending feature order keeps tie-breaks and float reductions
        # identical to sequential execution
        for f in range(self.bins.shape[1]):
            cand = self.thresholds[f]
            if cand.size == 0:
                continue
            b = self.bins[rows, f]
            n_bins = cand.size + 1
            counts = np.bincount(b, minlength=n_bins)
            g_bin = np.bincount(b, weights=g_all, minlength=n_bins)
            h_bin = np.bincount(b, weights=h_all, minlength=n_bins)
            n_left = np.cumsum(counts)[:-1]
            g_left = np.cumsum(g_bin)[:-1]
            h_left = np.cumsum(h_bin)[:-1]
            n_right = rows.size - n_left
            g_right = g_tot - g_left
            h_right = h_tot - h_left
            valid = (n_left >= self.min_samples_leaf) & (n_right >= self.min_samples_leaf)
            if not valid.any():
                continue
            gain = (g_left * g_left / (h_left + 1.0)
                    + g_right * g_right / (h_right + 1.0)
                    - parent_score)
            gain[~valid] = -np.inf
            j = int(np.argmax(gain))
            if gain[j] > best_gain:
                best_gain = float(gain[j])
                best = (f, j)
        return best


def grow_tree(bins, thresholds, grad, hess, max_depth, min_samples_leaf,
              learning_rate):
    return _TreeBuilder(bins, thresholds, grad, hess, max_depth,
                        min_samples_leaf, learning_rate).build()
