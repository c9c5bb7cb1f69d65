import json
import math

import numpy as np
import pytest

from alboost.data import (
    CATEGORICAL,
    NUMERIC,
    TARGET_CLASS,
    TARGET_REGRESSION,
    ColumnSchema,
    Dataset,
    gen_blobs,
    gen_friedman1,
    load_csv,
    load_schema,
    save_csv,
    save_schema,
    schema_from_dict,
    schema_to_dict,
    train_test_split,
    validate_schema,
)

from conftest import dataset_matrix


def small_schema():
    return [
        ColumnSchema("a", NUMERIC),
        ColumnSchema("cat", CATEGORICAL),
        ColumnSchema("y", TARGET_CLASS),
    ]


class TestSchema:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown column kind"):
            ColumnSchema("a", "text")

    def test_exactly_one_target_required(self):
        with pytest.raises(ValueError, match="exactly one target"):
            validate_schema([ColumnSchema("a", NUMERIC), ColumnSchema("b", NUMERIC)])
        with pytest.raises(ValueError, match="exactly one target"):
            validate_schema([ColumnSchema("y", TARGET_CLASS),
                             ColumnSchema("z", TARGET_REGRESSION)])

    def test_needs_a_feature_column(self):
        with pytest.raises(ValueError, match="at least one feature"):
            validate_schema([ColumnSchema("y", TARGET_CLASS)])

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            validate_schema([ColumnSchema("a", NUMERIC), ColumnSchema("a", NUMERIC),
                             ColumnSchema("y", TARGET_CLASS)])

    def test_dict_and_file_round_trip(self, tmp_path):
        schema = small_schema()
        assert schema_from_dict(schema_to_dict(schema)) == schema
        path = tmp_path / "schema.json"
        save_schema(schema, path)
        assert load_schema(path) == schema
        doc = json.loads(path.read_text())
        assert doc == {"a": "numeric", "cat": "categorical", "y": "target_class"}


class TestDataset:
    def test_columns_are_read_only(self):
        ds = Dataset(small_schema(), {"a": [1.0, 2.0], "cat": ["x", "y"]},
                     labels=[0, 1])
        with pytest.raises(ValueError):
            ds.columns["a"][0] = 5.0
        with pytest.raises(ValueError):
            ds.labels[0] = 5.0

    def test_class_count_inferred_and_overridable(self):
        ds = Dataset(small_schema(), {"a": [1, 2, 3], "cat": list("xyz")},
                     labels=[0, 2, 1])
        assert ds.n_classes == 3
        ds = Dataset(small_schema(), {"a": [1, 2, 3], "cat": list("xyz")},
                     labels=[0, 1, 0], n_classes=5)
        assert ds.n_classes == 5

    def test_label_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            Dataset(small_schema(), {"a": [1, 2], "cat": ["x", "y"]},
                    labels=[0, 3], n_classes=2)

    def test_non_integer_class_labels_rejected(self):
        with pytest.raises(ValueError, match="non-negative integers"):
            Dataset(small_schema(), {"a": [1, 2], "cat": ["x", "y"]},
                    labels=[0.5, 1.0])

    def test_labels_int_refuses_unlabelled_rows(self):
        ds = Dataset(small_schema(), {"a": [1, 2], "cat": ["x", "y"]},
                     labels=[0, math.nan], n_classes=2)
        assert ds.labels_int([0]).tolist() == [0]
        with pytest.raises(ValueError, match="unlabelled"):
            ds.labels_int()

    def test_row_count_mismatch_rejected(self):
        with pytest.raises(ValueError, match="rows"):
            Dataset(small_schema(), {"a": [1, 2], "cat": ["x"]}, labels=[0, 1])


class TestCsv:
    def test_round_trip_preserves_values_exactly(self, tmp_path):
        ds = Dataset(small_schema(),
                     {"a": [1.5, math.nan, -2.25e-7], "cat": ["red", "blue", "red"]},
                     labels=[1, 0, math.nan], n_classes=2)
        path = tmp_path / "data.csv"
        save_csv(ds, path)
        back = load_csv(path, small_schema(), n_classes=2)
        np.testing.assert_array_equal(back.columns["a"], ds.columns["a"])
        assert back.columns["cat"].tolist() == ["red", "blue", "red"]
        np.testing.assert_array_equal(back.labels, ds.labels)

    def test_save_is_deterministic_bytes(self, tmp_path):
        ds = gen_friedman1(50, 1.0, seed=4)
        save_csv(ds, tmp_path / "a.csv")
        save_csv(ds, tmp_path / "b.csv")
        a = (tmp_path / "a.csv").read_bytes()
        assert a == (tmp_path / "b.csv").read_bytes()
        assert b"\r" not in a

    def test_header_must_match_schema(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,wrong,y\n1,x,0\n")
        with pytest.raises(ValueError, match="does not match schema"):
            load_csv(path, small_schema())

    def test_bad_numeric_cell_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,cat,y\n1,x,0\noops,y,1\n")
        with pytest.raises(ValueError, match=r"row 2, column 'a'"):
            load_csv(path, small_schema())

    def test_bad_class_label_rejected(self, tmp_path):
        for cell in ("1.5", "-1", "dog"):
            path = tmp_path / "bad.csv"
            path.write_text(f"a,cat,y\n1,x,{cell}\n")
            with pytest.raises(ValueError, match="class label"):
                load_csv(path, small_schema())

    def test_empty_numeric_cell_is_missing(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("a,cat,y\n,x,0\n2,y,1\n")
        ds = load_csv(path, small_schema())
        assert math.isnan(ds.columns["a"][0])
        assert ds.columns["a"][1] == 2.0

    def test_missing_file_reported(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="not found"):
            load_csv(tmp_path / "nope.csv", small_schema())

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,cat,y\n1,x\n")
        with pytest.raises(ValueError, match="row 1 has 2 fields"):
            load_csv(path, small_schema())


class TestSplit:
    def test_sizes_disjoint_union(self):
        ds = gen_friedman1(103, 1.0, seed=0)
        split = train_test_split(ds, 0.2, seed=5)
        assert split.test_idx.shape[0] == round(0.2 * 103)
        combined = np.concatenate([split.train_idx, split.test_idx])
        np.testing.assert_array_equal(np.sort(combined), np.arange(103))

    def test_deterministic(self):
        ds = gen_friedman1(60, 1.0, seed=0)
        a = train_test_split(ds, 0.25, seed=9)
        b = train_test_split(ds, 0.25, seed=9)
        np.testing.assert_array_equal(a.train_idx, b.train_idx)
        np.testing.assert_array_equal(a.test_idx, b.test_idx)

    def test_stratified_keeps_class_proportions(self):
        ds = gen_blobs(400, 2, 4, 4.0, seed=1)
        split = train_test_split(ds, 0.25, seed=3)
        y = ds.labels_int()
        for c in range(4):
            # 100 rows per class, a quarter of each should be test
            assert np.sum(y[split.test_idx] == c) == 25

    def test_stratified_keeps_every_class_in_train(self):
        schema = [ColumnSchema("a", NUMERIC), ColumnSchema("y", TARGET_CLASS)]
        ds = Dataset(schema, {"a": np.arange(10.0)},
                     labels=[0, 0, 0, 0, 0, 0, 0, 0, 1, 1])
        for seed in range(20):
            split = train_test_split(ds, 0.5, seed=seed)
            y_train = ds.labels_int(split.train_idx)
            assert set(np.unique(y_train)) == {0, 1}

    def test_fraction_bounds(self):
        ds = gen_friedman1(20, 1.0, seed=0)
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError, match="test_fraction"):
                train_test_split(ds, bad, seed=0)


class TestGenerators:
    def test_blobs_deterministic_per_seed(self):
        a = gen_blobs(80, 3, 4, 4.0, seed=2)
        b = gen_blobs(80, 3, 4, 4.0, seed=2)
        c = gen_blobs(80, 3, 4, 4.0, seed=3)
        np.testing.assert_array_equal(dataset_matrix(a), dataset_matrix(b))
        assert not np.array_equal(dataset_matrix(a), dataset_matrix(c))

    def test_blobs_class_counts_and_schema(self):
        ds = gen_blobs(103, 2, 4, 4.0, seed=0)
        counts = np.bincount(ds.labels_int())
        assert counts.tolist() == [26, 26, 26, 25]
        assert ds.task == "classification"
        assert ds.n_classes == 4
        assert ds.feature_names == ["x0", "x1"]

    def test_blobs_adjacent_class_separation(self):
        # sample means estimate the true centers to ~0.1 at this size
        ds = gen_blobs(8000, 2, 4, 10.0, seed=0)
        X = dataset_matrix(ds)
        y = ds.labels_int()
        centers = np.array([X[y == c].mean(axis=0) for c in range(4)])
        for c in range(4):
            gap = np.linalg.norm(centers[c] - centers[(c + 1) % 4])
            assert abs(gap - 10.0) < 0.3

    def test_friedman1_matches_closed_form_when_noise_free(self):
        ds = gen_friedman1(200, 0.0, seed=7)
        X = dataset_matrix(ds)
        expected = (10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
                    + 20.0 * (X[:, 2] - 0.5) ** 2
                    + 10.0 * X[:, 3] + 5.0 * X[:, 4])
        np.testing.assert_allclose(ds.labels, expected, rtol=0, atol=1e-12)
        assert X.shape == (200, 10)
        assert X.min() >= 0.0 and X.max() <= 1.0

    def test_friedman1_midpoint_value(self):
        # all features 0.5: 10*sin(pi/4) + 0 + 5 + 2.5 = 14.571067811865476
        X = np.full((1, 10), 0.5)
        y = (10.0 * np.sin(np.pi * X[0, 0] * X[0, 1])
             + 20.0 * (X[0, 2] - 0.5) ** 2 + 10.0 * X[0, 3] + 5.0 * X[0, 4])
        assert abs(y - 14.571067811865476) < 1e-12

    def test_generator_argument_validation(self):
        with pytest.raises(ValueError):
            gen_blobs(10, 1, 4, 4.0, seed=0)
        with pytest.raises(ValueError):
            gen_blobs(10, 2, 1, 4.0, seed=0)
        with pytest.raises(ValueError):
            gen_friedman1(10, -1.0, seed=0)
