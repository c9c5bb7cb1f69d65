import math

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from alboost.data import (
    CATEGORICAL,
    NUMERIC,
    TARGET_CLASS,
    TARGET_REGRESSION,
    ColumnSchema,
    Dataset,
)
from alboost.encoding import TableEncoder


def binary_dataset():
    schema = [
        ColumnSchema("num", NUMERIC),
        ColumnSchema("tok", CATEGORICAL),
        ColumnSchema("y", TARGET_CLASS),
    ]
    return Dataset(
        schema,
        {"num": [1.0, 2.0, 3.0, math.nan], "tok": ["A", "A", "B", "C"]},
        labels=[1, 0, 1, 1],
    )


def test_numeric_columns_pass_through():
    ds = binary_dataset()
    enc = TableEncoder().fit(ds, [0, 1, 2])
    X = enc.transform(ds, [0, 1, 2])
    np.testing.assert_allclose(X[:, 0], [1.0, 2.0, 3.0])


def test_smoothed_token_statistics_by_hand():
    ds = binary_dataset()
    enc = TableEncoder(smoothing=1.0).fit(ds, [0, 1, 2])
    # prior = mean(y over fit rows) = 2/3
    # A: (1 + 1*(2/3)) / (2 + 1); B: (1 + 2/3) / 2; unseen C -> prior
    X = enc.transform(ds)
    prior = 2.0 / 3.0
    np.testing.assert_allclose(X[0, 1], (1 + prior) / 3)
    np.testing.assert_allclose(X[2, 1], (1 + prior) / 2)
    np.testing.assert_allclose(X[3, 1], prior)


def test_smoothing_parameter_shifts_toward_prior():
    ds = binary_dataset()
    heavy = TableEncoder(smoothing=100.0).fit(ds, [0, 1, 2])
    X = heavy.transform(ds)
    assert abs(X[0, 1] - 2.0 / 3.0) < 0.01


def test_missing_numeric_imputed_with_fit_rows_median():
    ds = binary_dataset()
    enc = TableEncoder().fit(ds, [0, 1, 2])
    X = enc.transform(ds, [3])
    assert X[0, 0] == 2.0  # median of {1, 2, 3}


def test_fit_uses_only_given_rows():
    ds = binary_dataset()
    enc = TableEncoder().fit(ds, [0, 1])
    # prior over rows {0,1} = 0.5; token A seen twice with sum 1
    X = enc.transform(ds)
    np.testing.assert_allclose(X[0, 1], (1 + 0.5) / 3)
    np.testing.assert_allclose(X[2, 1], 0.5)  # B unseen in fit rows


def test_regression_targets_encode_to_means():
    schema = [ColumnSchema("tok", CATEGORICAL), ColumnSchema("y", TARGET_REGRESSION)]
    ds = Dataset(schema, {"tok": ["A", "A", "B"]}, labels=[10.0, 20.0, 30.0])
    enc = TableEncoder(smoothing=1.0).fit(ds, [0, 1, 2])
    X = enc.transform(ds)
    prior = 20.0
    np.testing.assert_allclose(X[0, 0], (30.0 + prior) / 3)
    np.testing.assert_allclose(X[2, 0], (30.0 + prior) / 2)


def test_multiclass_expands_one_channel_per_class():
    schema = [ColumnSchema("tok", CATEGORICAL), ColumnSchema("y", TARGET_CLASS)]
    ds = Dataset(schema, {"tok": ["A", "A", "B", "B"]}, labels=[0, 2, 1, 1],
                 n_classes=3)
    enc = TableEncoder(smoothing=1.0).fit(ds, [0, 1, 2, 3])
    X = enc.transform(ds)
    assert X.shape == (4, 3)
    assert enc.feature_names_out_ == ["tok=0", "tok=1", "tok=2"]
    # channel 1 holds smoothed P(class 1 | token): A never class 1, B always
    prior1 = 0.5
    np.testing.assert_allclose(X[0, 1], (0 + prior1) / 3)
    np.testing.assert_allclose(X[2, 1], (2 + prior1) / 3)


def test_transform_before_fit_raises():
    ds = binary_dataset()
    with pytest.raises(NotFittedError):
        TableEncoder().transform(ds)


def test_fit_rejects_empty_or_unlabelled_rows():
    ds = binary_dataset()
    with pytest.raises(ValueError, match="empty"):
        TableEncoder().fit(ds, [])
    schema = [ColumnSchema("tok", CATEGORICAL), ColumnSchema("y", TARGET_CLASS)]
    partial = Dataset(schema, {"tok": ["A", "B"]}, labels=[0, math.nan],
                      n_classes=2)
    with pytest.raises(ValueError, match="without labels"):
        TableEncoder().fit(partial, [0, 1])


def test_dict_round_trip_reproduces_transform():
    ds = binary_dataset()
    enc = TableEncoder(smoothing=2.5).fit(ds, [0, 1, 2])
    clone = TableEncoder.from_dict(enc.to_dict())
    np.testing.assert_array_equal(clone.transform(ds), enc.transform(ds))


def test_get_params_round_trip():
    enc = TableEncoder(smoothing=3.0)
    assert enc.get_params() == {"smoothing": 3.0}
    enc.set_params(smoothing=1.5)
    assert enc.smoothing == 1.5
