"""Tabular datasets: typed columns, CSV round-trip, splits, synthetic generators.

A :class:`Dataset` stores features column-wise (numeric as float64 with NaN
marking missing cells, categorical as string tokens) plus an optional target.
Active-learning code never mutates a dataset; labelled/unlabelled/test splits
are index sets over one immutable table.
"""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .validation import as_index_array, check_fraction, check_positive_int

NUMERIC = "numeric"
CATEGORICAL = "categorical"
TARGET_CLASS = "target_class"
TARGET_REGRESSION = "target_regression"

COLUMN_KINDS = (NUMERIC, CATEGORICAL, TARGET_CLASS, TARGET_REGRESSION)
TARGET_KINDS = (TARGET_CLASS, TARGET_REGRESSION)


@dataclass(frozen=True)
class ColumnSchema:
    """One typed column: a feature (numeric/categorical) or the target."""

    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in COLUMN_KINDS:
            raise ValueError(f"unknown column kind {self.kind!r} for column {self.name!r}")


def validate_schema(schema):
    schema = list(schema)
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise ValueError("column names must be unique")
    n_targets = sum(1 for c in schema if c.kind in TARGET_KINDS)
    if n_targets != 1:
        raise ValueError(f"schema must have exactly one target column, got {n_targets}")
    if len(schema) < 2:
        raise ValueError("schema must have at least one feature column")
    return schema


def schema_to_dict(schema):
    return {c.name: c.kind for c in schema}


def schema_from_dict(doc):
    if not isinstance(doc, dict):
        raise ValueError("schema document must be a JSON object")
    return validate_schema([ColumnSchema(name, kind) for name, kind in doc.items()])


def load_schema(path):
    """Read a schema JSON document mapping column name -> kind."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return schema_from_dict(doc)


def save_schema(schema, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema_to_dict(schema), fh, indent=2)
        fh.write("\n")


class Dataset:
    """Immutable column-typed table with an optional per-row target.

    Parameters
    ----------
    schema : list of ColumnSchema
    columns : dict
        Feature column name -> 1-D array. Numeric columns become float64
        (NaN = missing); categorical columns become string tokens.
    labels : array or None
        Per-row target as float64; NaN marks rows whose label is unknown.
        Class labels must be integers in 0..C-1.
    n_classes : int, optional
        Number of classes for classification. Inferred from the labels when
        omitted; required when no labels are present.
    """

    def __init__(self, schema, columns, labels=None, n_classes=None):
        self.schema = validate_schema(schema)
        self.feature_schema = [c for c in self.schema if c.kind not in TARGET_KINDS]
        self.target = next(c for c in self.schema if c.kind in TARGET_KINDS)
        self.task = "classification" if self.target.kind == TARGET_CLASS else "regression"

        self.columns = {}
        n_rows = None
        for col in self.feature_schema:
            if col.name not in columns:
                raise ValueError(f"missing data for feature column {col.name!r}")
            if col.kind == NUMERIC:
                arr = np.array(columns[col.name], dtype=np.float64, copy=True)
            else:
                arr = np.asarray([str(v) for v in columns[col.name]], dtype=object)
            if n_rows is None:
                n_rows = arr.shape[0]
            elif arr.shape[0] != n_rows:
                raise ValueError(f"column {col.name!r} has {arr.shape[0]} rows, expected {n_rows}")
            arr.setflags(write=False)
            self.columns[col.name] = arr
        self.n_rows = int(n_rows if n_rows is not None else 0)

        if labels is None:
            self.labels = np.full(self.n_rows, np.nan)
        else:
            self.labels = np.array(labels, dtype=np.float64, copy=True).reshape(-1)
            if self.labels.shape[0] != self.n_rows:
                raise ValueError("labels length does not match row count")
        self.labels.setflags(write=False)

        self.n_classes = None
        if self.task == "classification":
            known = self.labels[~np.isnan(self.labels)]
            if known.size:
                if np.any(known < 0) or np.any(known != np.round(known)):
                    raise ValueError("class labels must be non-negative integers")
            if n_classes is not None:
                self.n_classes = check_positive_int(n_classes, "n_classes", minimum=2)
                if known.size and known.max() >= self.n_classes:
                    raise ValueError("class label out of range for n_classes")
            elif known.size:
                inferred = int(known.max()) + 1
                if inferred < 2:
                    raise ValueError("classification needs at least 2 classes")
                self.n_classes = inferred

    @property
    def feature_names(self):
        return [c.name for c in self.feature_schema]

    def labelled_mask(self):
        return ~np.isnan(self.labels)

    def labels_int(self, idx=None):
        """Class labels as ints; raises if any requested row is unlabelled."""
        y = self.labels if idx is None else self.labels[as_index_array(idx)]
        if np.any(np.isnan(y)):
            raise ValueError("requested rows include unlabelled instances")
        return y.astype(np.int64)


def _parse_numeric(cell, row, col_name):
    if cell == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise ValueError(
            f"cannot parse {cell!r} as a number at row {row}, column {col_name!r}"
        ) from None


def _parse_class_label(cell, row, col_name):
    if cell == "":
        return math.nan
    try:
        value = float(cell)
    except ValueError:
        value = math.nan
    if math.isnan(value) or value != int(value) or value < 0:
        raise ValueError(
            f"cannot parse {cell!r} as a class label at row {row}, column {col_name!r}"
        )
    return value


def load_csv(path, schema, n_classes=None):
    """Load a UTF-8, comma-separated file with one header row.

    The header must contain exactly the schema's column names (any order);
    empty fields are recorded as missing.
    """
    schema = validate_schema(schema)
    expected = {c.name for c in schema}
    by_name = {c.name: c for c in schema}
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise FileNotFoundError(f"dataset file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty, expected a header row") from None
        if set(header) != expected or len(header) != len(schema):
            raise ValueError(
                f"header {header!r} does not match schema columns {sorted(expected)!r}"
            )
        cells = {name: [] for name in header}
        for row_num, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise ValueError(f"row {row_num} has {len(row)} fields, expected {len(header)}")
            for name, cell in zip(header, row):
                col = by_name[name]
                if col.kind == NUMERIC:
                    cells[name].append(_parse_numeric(cell, row_num, name))
                elif col.kind == TARGET_CLASS:
                    cells[name].append(_parse_class_label(cell, row_num, name))
                elif col.kind == TARGET_REGRESSION:
                    cells[name].append(_parse_numeric(cell, row_num, name))
                else:
                    cells[name].append(cell)

    ordered = [by_name[name] for name in header]
    target_name = next(c.name for c in ordered if c.kind in TARGET_KINDS)
    columns = {name: vals for name, vals in cells.items() if name != target_name}
    labels = np.asarray(cells[target_name], dtype=np.float64)
    return Dataset(ordered, columns, labels, n_classes=n_classes)


def _format_cell(value):
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def save_csv(dataset, path):
    """Write a dataset back to CSV in schema column order (deterministic bytes)."""
    names = [c.name for c in dataset.schema]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(dataset.n_rows):
            row = []
            for col in dataset.schema:
                if col.kind in TARGET_KINDS:
                    label = dataset.labels[i]
                    if math.isnan(label):
                        row.append("")
                    elif col.kind == TARGET_CLASS:
                        row.append(str(int(label)))
                    else:
                        row.append(repr(float(label)))
                elif col.kind == NUMERIC:
                    row.append(_format_cell(float(dataset.columns[col.name][i])))
                else:
                    row.append(str(dataset.columns[col.name][i]))
            writer.writerow(row)


@dataclass(frozen=True)
class SplitIndices:
    """Disjoint row-index sets whose union covers all rows."""

    train_idx: np.ndarray
    test_idx: np.ndarray


def train_test_split(dataset, test_fraction, seed):
    """Deterministic seeded split; stratified by class when each class has >= 2 rows."""
    check_fraction(test_fraction, "test_fraction")
    n = dataset.n_rows
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    n_test = int(round(test_fraction * n))
    n_test = min(max(n_test, 1), n - 1)
    rng = np.random.default_rng(seed)

    stratify = False
    if dataset.task == "classification" and not np.any(np.isnan(dataset.labels)):
        y = dataset.labels_int()
        counts = np.bincount(y)
        present = counts[counts > 0]
        stratify = present.size >= 2 and present.min() >= 2

    if not stratify:
        perm = rng.permutation(n)
        test = np.sort(perm[:n_test])
        train = np.sort(perm[n_test:])
        return SplitIndices(train, test)

    y = dataset.labels_int()
    classes = np.unique(y)
    ideal = {c: n_test * np.sum(y == c) / n for c in classes}
    base = {c: int(math.floor(ideal[c])) for c in classes}
    # keep at least one training row per class
    for c in classes:
        base[c] = min(base[c], int(np.sum(y == c)) - 1)
    shortfall = n_test - sum(base.values())
    order = sorted(classes, key=lambda c: (-(ideal[c] - base[c]), c))
    take = dict(base)
    for c in order:
        if shortfall <= 0:
            break
        if take[c] + 1 <= int(np.sum(y == c)) - 1:
            take[c] += 1
            shortfall -= 1
    test_parts = []
    for c in classes:
        rows = np.flatnonzero(y == c)
        rows = rng.permutation(rows)
        test_parts.append(rows[: take[c]])
    test = np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, dtype=np.intp)
    mask = np.ones(n, dtype=bool)
    mask[test] = False
    return SplitIndices(np.flatnonzero(mask), test)


def gen_blobs(n_rows, n_features, n_classes, separation, seed):
    """Isotropic unit-variance Gaussian clusters, one per class.

    Cluster means sit on a circle in the first two feature dimensions with
    adjacent means exactly `separation` apart; remaining dimensions are
    pure noise around zero.
    """
    check_positive_int(n_rows, "n_rows")
    if n_features < 2:
        raise ValueError("gen_blobs needs at least 2 features")
    check_positive_int(n_classes, "n_classes", minimum=2)
    separation = float(separation)
    if separation < 0:
        raise ValueError("separation must be non-negative")

    radius = separation / (2.0 * math.sin(math.pi / n_classes))
    angles = 2.0 * math.pi * np.arange(n_classes) / n_classes
    centers = np.zeros((n_classes, n_features))
    centers[:, 0] = radius * np.cos(angles)
    centers[:, 1] = radius * np.sin(angles)

    per_class = np.full(n_classes, n_rows // n_classes, dtype=np.intp)
    per_class[: n_rows % n_classes] += 1

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_rows, n_features))
    labels = np.repeat(np.arange(n_classes), per_class).astype(np.float64)
    X += centers[labels.astype(np.intp)]

    schema = [ColumnSchema(f"x{j}", NUMERIC) for j in range(n_features)]
    schema.append(ColumnSchema("y", TARGET_CLASS))
    columns = {f"x{j}": X[:, j] for j in range(n_features)}
    return Dataset(schema, columns, labels, n_classes=n_classes)


FRIEDMAN1_FEATURES = 10


def gen_friedman1(n_rows, noise_sd, seed):
    """Friedman #1 benchmark: 5 informative uniform features plus 5 nuisance ones.

    y = 10*sin(pi*x1*x2) + 20*(x3 - 0.5)^2 + 10*x4 + 5*x5 + N(0, noise_sd^2)
    """
    check_positive_int(n_rows, "n_rows")
    noise_sd = float(noise_sd)
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = np.random.default_rng(seed)
    X = rng.random((n_rows, FRIEDMAN1_FEATURES))
    y = (
        10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
        + 20.0 * (X[:, 2] - 0.5) ** 2
        + 10.0 * X[:, 3]
        + 5.0 * X[:, 4]
    )
    y = y + rng.normal(0.0, noise_sd, size=n_rows) if noise_sd > 0 else y
    schema = [ColumnSchema(f"x{j}", NUMERIC) for j in range(FRIEDMAN1_FEATURES)]
    schema.append(ColumnSchema("y", TARGET_REGRESSION))
    columns = {f"x{j}": X[:, j] for j in range(FRIEDMAN1_FEATURES)}
    return Dataset(schema, columns, y)
