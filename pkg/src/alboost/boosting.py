"""Gradient boosting with Newton leaf values and prefix-structured prediction.

Every stage fits one tree per output channel (one for regression and binary
classification, one per class for softmax) to the current first/second-order
gradients. Leaf values are -sum(g)/(sum(h)+1) scaled by the learning rate, so
a model prefix of t stages is itself a valid model; staged predictions and
virtual-ensemble members are built from those prefixes.

Optional stochasticity: per-stage Bernoulli row subsampling and Gaussian noise
added to the per-row gradients (both driven by one generator seeded from
``random_state``; the subsample mask is drawn before the noise each stage).
"""

from dataclasses import asdict, dataclass
import json

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.exceptions import NotFittedError

from .tree import Tree, candidate_thresholds, grow_tree
from .validation import as_float_matrix, as_float_vector, check_positive_int

MODEL_FORMAT = "alboost-model"
MODEL_VERSION = 1

_PROB_EPS = 1e-12


@dataclass(frozen=True)
class TrainParams:
    """Hyper-parameters shared by the regressor and the classifier."""

    n_stages: int = 200
    learning_rate: float = 0.1
    max_depth: int = 4
    min_samples_leaf: int = 5
    subsample: float = 1.0
    langevin_noise_sd: float = 0.0
    max_thresholds_per_feature: int = 64
    random_state: int = 0

    def kwargs(self):
        return asdict(self)


class _SquaredLoss:
    kind = "squared"
    n_channels = 1

    def base_score(self, y):
        return np.array([float(np.mean(y))])

    def grad_hess(self, y, F):
        g = F[:, 0] - y
        h = np.ones_like(g)
        return g[:, None], h[:, None]

    def loss(self, y, F):
        return 0.5 * float(np.mean((F[:, 0] - y) ** 2))


class _LogisticLoss:
    kind = "logistic"
    n_channels = 1

    def base_score(self, y):
        p = np.clip(np.mean(y), _PROB_EPS, 1.0 - _PROB_EPS)
        return np.array([float(np.log(p / (1.0 - p)))])

    def grad_hess(self, y, F):
        p = _sigmoid(F[:, 0])
        g = p - y
        h = p * (1.0 - p)
        return g[:, None], h[:, None]

    def loss(self, y, F):
        z = F[:, 0]
        return float(np.mean(np.logaddexp(0.0, z) - y * z))


class _SoftmaxLoss:
    kind = "softmax"

    def __init__(self, n_classes):
        self.n_channels = n_classes

    def base_score(self, y):
        counts = np.bincount(y.astype(np.int64), minlength=self.n_channels)
        priors = np.clip(counts / y.shape[0], _PROB_EPS, None)
        return np.log(priors)

    def grad_hess(self, y, F):
        p = _softmax(F)
        onehot = np.zeros_like(p)
        onehot[np.arange(y.shape[0]), y.astype(np.int64)] = 1.0
        return p - onehot, p * (1.0 - p)

    def loss(self, y, F):
        lse = np.log(np.sum(np.exp(F - F.max(axis=1, keepdims=True)), axis=1))
        lse = lse + F.max(axis=1)
        return float(np.mean(lse - F[np.arange(y.shape[0]), y.astype(np.int64)]))


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(F):
    z = F - F.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class _BaseBoosting(BaseEstimator):
    def __init__(self, n_stages=200, learning_rate=0.1, max_depth=4,
                 min_samples_leaf=5, subsample=1.0, langevin_noise_sd=0.0,
                 max_thresholds_per_feature=64, random_state=0):
        self.n_stages = n_stages
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.subsample = subsample
        self.langevin_noise_sd = langevin_noise_sd
        self.max_thresholds_per_feature = max_thresholds_per_feature
        self.random_state = random_state

    def _check_params(self):
        check_positive_int(self.n_stages, "n_stages")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        check_positive_int(self.min_samples_leaf, "min_samples_leaf")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must be in (0, 1]")
        if self.langevin_noise_sd < 0:
            raise ValueError("langevin_noise_sd must be >= 0")
        check_positive_int(self.max_thresholds_per_feature,
                           "max_thresholds_per_feature")

    def _fit_boosting(self, X, y, loss):
        self._check_params()
        n, d = X.shape
        if n < 2 * self.min_samples_leaf:
            raise ValueError(
                f"need at least {2 * self.min_samples_leaf} rows "
                f"(2 * min_samples_leaf), got {n}")
        rng = np.random.default_rng(self.random_state)
        K = loss.n_channels
        self.base_score_ = loss.base_score(y)
        F = np.tile(self.base_score_, (n, 1))
        stages = []
        loss_path = []
        for _ in range(self.n_stages):
            if self.subsample < 1.0:
                rows = np.flatnonzero(rng.random(n) < self.subsample)
            else:
                rows = np.arange(n)
            g, h = loss.grad_hess(y, F)
            if self.langevin_noise_sd > 0:
                g = g + rng.normal(0.0, self.langevin_noise_sd, size=g.shape)
            if rows.size == 0:
                stages.append([Tree.leaf(0.0) for _ in range(K)])
                loss_path.append(loss.loss(y, F))
                continue
            thresholds = [
                candidate_thresholds(X[rows, f], self.max_thresholds_per_feature)
                for f in range(d)
            ]
            bins = np.empty((rows.size, d), dtype=np.int32)
            for f in range(d):
                bins[:, f] = np.searchsorted(thresholds[f], X[rows, f],
                                             side="right")
            stage = []
            for k in range(K):
                tree = grow_tree(bins, thresholds, g[rows, k], h[rows, k],
                                 self.max_depth, self.min_samples_leaf,
                                 self.learning_rate)
                stage.append(tree)
                F[:, k] += tree.predict(X)
            stages.append(stage)
            loss_path.append(loss.loss(y, F))
        self.stages_ = stages
        self.train_loss_path_ = np.asarray(loss_path)
        self.n_features_in_ = d
        return self

    def _check_fitted(self):
        if not hasattr(self, "stages_"):
            raise NotFittedError(
                f"{type(self).__name__} must be fitted before prediction")

    def _check_X(self, X):
        X = as_float_matrix(X, "X", require_finite=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, model expects {self.n_features_in_}")
        return X

    @property
    def n_stages_(self):
        return len(self.stages_)

    def _raw(self, X, prefix_len=None):
        self._check_fitted()
        X = self._check_X(X)
        T = self.n_stages_
        if prefix_len is None:
            prefix_len = T
        if prefix_len < (1 if T > 0 else 0) or prefix_len > T:
            raise ValueError(f"prefix_len must be in [1, {T}], got {prefix_len}")
        F = np.tile(self.base_score_, (X.shape[0], 1))
        for stage in self.stages_[:prefix_len]:
            for k, tree in enumerate(stage):
                F[:, k] += tree.predict(X)
        return F

    def _staged_raw(self, X):
        """Raw score after each prefix 1..T, shape (T, n, channels)."""
        self._check_fitted()
        X = self._check_X(X)
        T = self.n_stages_
        K = self.base_score_.shape[0]
        contrib = np.empty((T, X.shape[0], K))
        for t, stage in enumerate(self.stages_):
            for k, tree in enumerate(stage):
                contrib[t, :, k] = tree.predict(X)
        if T:
            # seed the running sum with the base score so every prefix matches
            # the sequential accumulation in _raw bit for bit
            contrib[0] += self.base_score_
        np.cumsum(contrib, axis=0, out=contrib)
        return contrib

    def _ensemble_prefixes(self, k):
        """Stage counts of the k virtual-ensemble members (last one = T)."""
        check_positive_int(k, "k")
        T = self.n_stages_
        if T == 0:
            raise ValueError("virtual ensemble needs a model with stages")
        k_eff = max(1, min(k, T // 2))
        half = T / 2.0
        return [int(np.floor(half + j * half / k_eff)) for j in range(1, k_eff + 1)]

    def leaf_indices(self, X):
        """Leaf id per tree, shape (n, n_trees); columns ordered by stage then channel."""
        self._check_fitted()
        X = self._check_X(X)
        trees = [tree for stage in self.stages_ for tree in stage]
        out = np.empty((X.shape[0], len(trees)), dtype=np.int32)
        for j, tree in enumerate(trees):
            out[:, j] = tree.apply(X)
        return out

    def _to_dict(self):
        self._check_fitted()
        return {
            "loss": self._loss_kind(),
            "params": self.get_params(),
            "n_features": int(self.n_features_in_),
            "base_score": self.base_score_.tolist(),
            "stages": [[tree.to_dict() for tree in stage] for stage in self.stages_],
        }


class GBTRegressor(RegressorMixin, _BaseBoosting):
    """Boosted-tree regressor under squared loss."""

    def fit(self, X, y):
        X = as_float_matrix(X, "X", require_finite=True)
        y = as_float_vector(y, "y", require_finite=True)
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y have different numbers of rows")
        return self._fit_boosting(X, y, _SquaredLoss())

    def _loss_kind(self):
        return "squared"

    def predict_raw(self, X, prefix_len=None):
        return self._raw(X, prefix_len)[:, 0]

    def predict(self, X):
        return self.predict_raw(X)

    def staged_predict(self, X):
        """Prediction after each prefix 1..T, shape (T, n)."""
        return self._staged_raw(X)[:, :, 0]

    def virtual_ensemble(self, X, k):
        """Member predictions from trailing model prefixes, shape (k_eff, n)."""
        prefixes = self._ensemble_prefixes(k)
        staged = self._staged_raw(X)[:, :, 0]
        return staged[np.asarray(prefixes) - 1]


class GBTClassifier(ClassifierMixin, _BaseBoosting):
    """Boosted-tree classifier: logistic loss for two classes, softmax above."""

    def __init__(self, n_stages=200, learning_rate=0.1, max_depth=4,
                 min_samples_leaf=5, subsample=1.0, langevin_noise_sd=0.0,
                 max_thresholds_per_feature=64, random_state=0, n_classes=None):
        super().__init__(n_stages, learning_rate, max_depth, min_samples_leaf,
                         subsample, langevin_noise_sd,
                         max_thresholds_per_feature, random_state)
        self.n_classes = n_classes

    def fit(self, X, y):
        X = as_float_matrix(X, "X", require_finite=True)
        y = np.asarray(y)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be one label per row of X")
        y = y.astype(np.float64)
        labels = y.astype(np.int64)
        if not np.array_equal(labels, y) or labels.min(initial=0) < 0:
            raise ValueError("class labels must be non-negative integers")
        if self.n_classes is None:
            n_classes = int(labels.max()) + 1 if labels.size else 0
            if n_classes < 2:
                raise ValueError("need at least two classes; pass n_classes "
                                 "explicitly when training data covers fewer")
        else:
            n_classes = self.n_classes
            check_positive_int(n_classes, "n_classes", minimum=2)
            if labels.size and labels.max() >= n_classes:
                raise ValueError(
                    f"class label {labels.max()} out of range for "
                    f"n_classes={n_classes}")
        self.n_classes_ = n_classes
        self.classes_ = np.arange(n_classes)
        loss = _LogisticLoss() if n_classes == 2 else _SoftmaxLoss(n_classes)
        return self._fit_boosting(X, labels.astype(np.float64), loss)

    def _loss_kind(self):
        return "logistic" if self.n_classes_ == 2 else "softmax"

    def predict_raw(self, X, prefix_len=None):
        raw = self._raw(X, prefix_len)
        return raw[:, 0] if self.n_classes_ == 2 else raw

    def _raw_to_proba(self, raw):
        if self.n_classes_ == 2:
            p = _sigmoid(raw[..., 0])
            return np.stack([1.0 - p, p], axis=-1)
        z = raw - raw.max(axis=-1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=-1, keepdims=True)

    def predict_proba(self, X):
        return self._raw_to_proba(self._raw(X))

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def staged_predict_proba(self, X):
        """Class probabilities after each prefix 1..T, shape (T, n, C)."""
        return self._raw_to_proba(self._staged_raw(X))

    def virtual_ensemble_proba(self, X, k):
        """Member class probabilities from trailing prefixes, shape (k_eff, n, C)."""
        prefixes = self._ensemble_prefixes(k)
        staged = self._raw_to_proba(self._staged_raw(X))
        return staged[np.asarray(prefixes) - 1]


def make_estimator(task, params, n_classes=None):
    """Build an unfitted estimator from TrainParams for the given task."""
    if task == "classification":
        return GBTClassifier(n_classes=n_classes, **params.kwargs())
    if task == "regression":
        return GBTRegressor(**params.kwargs())
    raise ValueError(f"task must be classification or regression, got {task!r}")


def model_to_dict(model):
    doc = model._to_dict()
    if isinstance(model, GBTClassifier):
        doc["n_classes"] = model.n_classes_
    return doc


def model_from_dict(doc):
    loss = doc["loss"]
    params = dict(doc["params"])
    if loss == "squared":
        model = GBTRegressor(**{k: v for k, v in params.items()
                                if k != "n_classes"})
    else:
        model = GBTClassifier(**params)
        model.n_classes_ = int(doc["n_classes"])
        model.classes_ = np.arange(model.n_classes_)
    model.base_score_ = np.asarray(doc["base_score"], dtype=np.float64)
    model.stages_ = [[Tree.from_dict(t) for t in stage] for stage in doc["stages"]]
    model.n_features_in_ = int(doc["n_features"])
    return model


def save_model(path, model, encoder=None, schema=None):
    """Write a versioned JSON bundle: model plus optional encoder and schema."""
    from .data import schema_to_dict
    from .encoding import TableEncoder  # noqa: F401  (documents the bundle shape)

    bundle = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "model": model_to_dict(model),
        "encoder": encoder.to_dict() if encoder is not None else None,
        "schema": schema_to_dict(schema) if schema is not None else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(bundle, fh)
        fh.write("\n")


def load_model(path):
    """Read a bundle written by save_model; returns (model, encoder, schema)."""
    from .data import schema_from_dict
    from .encoding import TableEncoder

    with open(path, "r", encoding="utf-8") as fh:
        bundle = json.load(fh)
    if bundle.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a model bundle: {path}")
    if bundle.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model bundle version {bundle.get('version')}")
    model = model_from_dict(bundle["model"])
    encoder = (TableEncoder.from_dict(bundle["encoder"])
               if bundle.get("encoder") is not None else None)
    schema = (schema_from_dict(bundle["schema"])
              if bundle.get("schema") is not None else None)
    return model, encoder, schema


def model_feature_count(model):
    return model.n_features_in_
