"""Feature encoding fitted on labelled rows only, so unlabelled and test
rows never contribute statistics.

Numeric columns pass through with missing cells imputed by the labelled-set
median. Categorical tokens become smoothed target statistics::

    enc(token) = (sum_of_targets(token) + smoothing * prior) / (count(token) + smoothing)

where the per-token target is the raw target (regression), the class index
(binary classification), or one indicator per class (multiclass, yielding one
encoded column per class). Unseen tokens encode to the prior.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .data import CATEGORICAL, NUMERIC
from .validation import as_index_array


class TableEncoder(BaseEstimator, TransformerMixin):
    """Dataset -> numeric feature matrix, refit each time the labelled set grows."""

    def __init__(self, smoothing=1.0):
        self.smoothing = smoothing

    def fit(self, dataset, labelled_idx):
        labelled_idx = as_index_array(labelled_idx, "labelled_idx")
        if labelled_idx.size == 0:
            raise ValueError("cannot fit an encoder on an empty labelled set")
        smoothing = float(self.smoothing)
        if smoothing < 0:
            raise ValueError("smoothing must be non-negative")
        y = dataset.labels[labelled_idx]
        if np.any(np.isnan(y)):
            raise ValueError("labelled_idx contains rows without labels")

        if dataset.task == "classification" and dataset.n_classes > 2:
            # one indicator channel per class
            targets = np.stack([(y == c).astype(np.float64) for c in range(dataset.n_classes)], axis=1)
        else:
            targets = y.reshape(-1, 1)
        self.n_channels_ = targets.shape[1]
        self.priors_ = targets.mean(axis=0)

        self.medians_ = {}
        self.token_stats_ = {}
        for col in dataset.feature_schema:
            values = dataset.columns[col.name][labelled_idx]
            if col.kind == NUMERIC:
                finite = values[~np.isnan(values)]
                self.medians_[col.name] = float(np.median(finite)) if finite.size else 0.0
            else:
                stats = {}
                for token in np.unique(values):
                    mask = values == token
                    count = int(mask.sum())
                    sums = targets[mask].sum(axis=0)
                    stats[str(token)] = (sums + smoothing * self.priors_) / (count + smoothing)
                self.token_stats_[col.name] = stats

        names = []
        for col in dataset.feature_schema:
            if col.kind == CATEGORICAL and self.n_channels_ > 1:
                names.extend(f"{col.name}={c}" for c in range(self.n_channels_))
            else:
                names.append(col.name)
        self.feature_names_out_ = names
        return self

    def transform(self, dataset, idx=None):
        if not hasattr(self, "priors_"):
            raise NotFittedError("TableEncoder is not fitted")
        idx = np.arange(dataset.n_rows) if idx is None else as_index_array(idx, "idx")
        out = np.empty((idx.size, len(self.feature_names_out_)), dtype=np.float64)
        j = 0
        for col in dataset.feature_schema:
            values = dataset.columns[col.name][idx]
            if col.kind == NUMERIC:
                filled = np.where(np.isnan(values), self.medians_[col.name], values)
                out[:, j] = filled
                j += 1
            else:
                stats = self.token_stats_[col.name]
                encoded = np.empty((idx.size, self.n_channels_), dtype=np.float64)
                for i, token in enumerate(values):
                    encoded[i] = stats.get(str(token), self.priors_)
                out[:, j : j + self.n_channels_] = encoded
                j += self.n_channels_
        return out

    def encode_token(self, column, token):
        """Encoded value(s) for one categorical token (prior when unseen)."""
        if not hasattr(self, "priors_"):
            raise NotFittedError("TableEncoder is not fitted")
        values = self.token_stats_[column].get(str(token), self.priors_)
        return float(values[0]) if self.n_channels_ == 1 else np.asarray(values)

    def to_dict(self):
        return {
            "smoothing": float(self.smoothing),
            "n_channels": int(self.n_channels_),
            "priors": [float(v) for v in self.priors_],
            "medians": {k: float(v) for k, v in self.medians_.items()},
            "token_stats": {
                col: {tok: [float(v) for v in vals] for tok, vals in stats.items()}
                for col, stats in self.token_stats_.items()
            },
            "feature_names_out": list(self.feature_names_out_),
        }

    @classmethod
    def from_dict(cls, doc):
        enc = cls(smoothing=doc["smoothing"])
        enc.n_channels_ = int(doc["n_channels"])
        enc.priors_ = np.asarray(doc["priors"], dtype=np.float64)
        enc.medians_ = {k: float(v) for k, v in doc["medians"].items()}
        enc.token_stats_ = {
            col: {tok: np.asarray(vals, dtype=np.float64) for tok, vals in stats.items()}
            for col, stats in doc["token_stats"].items()
        }
        enc.feature_names_out_ = list(doc["feature_names_out"])
        return enc
