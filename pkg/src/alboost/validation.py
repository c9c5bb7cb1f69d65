"""Input validation helpers shared across the package."""

import numpy as np


def as_float_matrix(X, name="X", require_finite=True):
    """Coerce to a 2-D float64 array, optionally rejecting NaN/inf."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if require_finite and not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_float_vector(y, name="y", require_finite=True):
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if require_finite and not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite values")
    return y


def as_index_array(idx, name="indices"):
    idx = np.asarray(idx, dtype=np.intp).reshape(-1)
    if idx.size and idx.min() < 0:
        raise ValueError(f"{name} must be non-negative")
    return idx


def check_fraction(value, name):
    """A fraction must lie strictly inside (0, 1)."""
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must be in (0, 1), got {value}")
    return value


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, (int, np.integer)) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_probability_vector(p, name="probs", tol=1e-9):
    """Validate a finite distribution: components >= 0, summing to 1 within tol."""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} contains non-finite values")
    if p.min() < 0.0:
        raise ValueError(f"{name} has negative components")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"{name} sums to {total}, expected 1 within {tol}")
    return p
