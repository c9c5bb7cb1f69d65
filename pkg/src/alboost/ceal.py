"""Cost-effective pseudo-labelling of high-confidence pool instances.

Classification keeps pool rows whose predictive entropy (and/or model
uncertainty, depending on mode) falls strictly below a threshold and labels
them with the argmax class. Regression keeps rows whose model uncertainty
falls strictly below the threshold and labels them with the point prediction.
Thresholds are either absolute values or per-iteration quantiles of the
current pool's score distribution, resolved before any filtering. Pseudo-label
sets are rebuilt from scratch every iteration and never touch oracle labels.
"""

from dataclasses import dataclass

import numpy as np

from .validation import as_index_array

MODES = ("none", "ceal", "mceal", "hybrid")
THRESHOLD_KINDS = ("absolute", "quantile")


@dataclass(frozen=True)
class CealConfig:
    mode: str = "none"
    entropy_threshold: float = None
    uncertainty_threshold: float = None
    threshold_kind: str = "quantile"
    quantile: float = 0.05

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"ceal mode must be one of {MODES}, got {self.mode!r}")
        if self.threshold_kind not in THRESHOLD_KINDS:
            raise ValueError(
                f"threshold_kind must be one of {THRESHOLD_KINDS}, "
                f"got {self.threshold_kind!r}")
        if self.mode == "none":
            return
        if self.threshold_kind == "quantile":
            if not 0.0 < self.quantile < 1.0:
                raise ValueError("quantile must be in (0, 1)")
            return
        if self.mode in ("ceal", "hybrid"):
            if self.entropy_threshold is None or self.entropy_threshold < 0:
                raise ValueError(f"mode {self.mode!r} needs entropy_threshold >= 0")
        if self.mode in ("mceal", "hybrid"):
            if self.uncertainty_threshold is None or self.uncertainty_threshold < 0:
                raise ValueError(f"mode {self.mode!r} needs uncertainty_threshold >= 0")

    def to_dict(self):
        return {
            "mode": self.mode,
            "entropy_threshold": self.entropy_threshold,
            "uncertainty_threshold": self.uncertainty_threshold,
            "threshold_kind": self.threshold_kind,
            "quantile": self.quantile,
        }

    @classmethod
    def from_dict(cls, doc):
        known = {"mode", "entropy_threshold", "uncertainty_threshold",
                 "threshold_kind", "quantile"}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown ceal config fields: {sorted(extra)}")
        defaults = cls()
        return cls(**{k: doc.get(k, getattr(defaults, k)) for k in known})


@dataclass(frozen=True)
class PseudoLabelSet:
    """Pool rows paired with model-assigned labels, tagged with the iteration."""

    indices: np.ndarray
    labels: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        object.__setattr__(self, "indices", as_index_array(self.indices, "indices"))
        object.__setattr__(
            self, "labels", np.asarray(self.labels, dtype=np.float64).reshape(-1))
        if self.indices.shape[0] != self.labels.shape[0]:
            raise ValueError("indices and labels must be the same length")

    def __len__(self):
        return int(self.indices.shape[0])

    @classmethod
    def empty(cls, iteration=0):
        return cls(np.empty(0, dtype=np.intp), np.empty(0), iteration)


def _resolve_threshold(config, values, explicit):
    if config.threshold_kind == "absolute":
        return float(explicit)
    if values.size == 0:
        return 0.0
    return float(np.quantile(values, config.quantile))


def _check_aligned(n, arr, name):
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValueError(f"{name} must be 1-D and aligned with the pool")
    return arr


def filter_classification(probs, entropies, model_uncertainties, config,
                          pool_idx=None, iteration=0):
    """Confidence filter over pool rows; kept rows get the argmax class as label.

    Mode ceal thresholds entropy, mceal thresholds model uncertainty, hybrid
    requires both (so hybrid = ceal-set intersect mceal-set). Comparisons are
    strict, and quantile thresholds are taken over the whole pool passed in.
    """
    if config.mode == "none":
        raise ValueError("pseudo-label filtering called with mode 'none'")
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] == 0:
        raise ValueError("probs must be a non-empty (pool, classes) matrix")
    n = probs.shape[0]

    keep = np.ones(n, dtype=bool)
    if config.mode in ("ceal", "hybrid"):
        entropies = _check_aligned(n, entropies, "entropies")
        delta = _resolve_threshold(config, entropies, config.entropy_threshold)
        keep &= entropies < delta
    if config.mode in ("mceal", "hybrid"):
        uncertainties = _check_aligned(n, model_uncertainties, "model_uncertainties")
        delta = _resolve_threshold(config, uncertainties,
                                   config.uncertainty_threshold)
        keep &= uncertainties < delta

    kept = np.flatnonzero(keep)
    labels = np.argmax(probs[kept], axis=1).astype(np.float64)
    if pool_idx is not None:
        pool_idx = as_index_array(pool_idx, "pool_idx")
        if pool_idx.shape[0] != n:
            raise ValueError("pool_idx must be aligned with probs")
        kept = pool_idx[kept]
    return PseudoLabelSet(kept, labels, iteration)


def filter_regression(predictions, model_uncertainties, config,
                      pool_idx=None, iteration=0):
    """Keep rows with model uncertainty strictly below the threshold.

    Kept rows get the model's point prediction as their pseudo-label.
    """
    if config.mode == "none":
        raise ValueError("pseudo-label filtering called with mode 'none'")
    predictions = np.asarray(predictions, dtype=np.float64)
    if predictions.ndim != 1 or predictions.shape[0] == 0:
        raise ValueError("predictions must be a non-empty 1-D array")
    n = predictions.shape[0]
    uncertainties = _check_aligned(n, model_uncertainties, "model_uncertainties")
    delta = _resolve_threshold(config, uncertainties, config.uncertainty_threshold)
    kept = np.flatnonzero(uncertainties < delta)
    labels = predictions[kept]
    if pool_idx is not None:
        pool_idx = as_index_array(pool_idx, "pool_idx")
        if pool_idx.shape[0] != n:
            raise ValueError("pool_idx must be aligned with predictions")
        kept = pool_idx[kept]
    return PseudoLabelSet(kept, labels, iteration)
