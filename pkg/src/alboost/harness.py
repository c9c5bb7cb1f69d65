"""Pool-based active-learning experiment runner.

One run = one (config, seed) pair: split the data, reveal a seeded random
initial batch of labels, then alternate between fitting on everything
labelled (plus pseudo-labels when enabled), evaluating on the held-out test
rows, and querying the next batch by the configured strategy. The simulated
oracle is the ground-truth label column; training code only ever sees the
revealed subset.

All randomness inside a run derives from one generator seeded with the run
seed; sub-seeds are drawn in a fixed order (split, initial batch, then one
model seed and one selection seed per iteration) so strategies that ignore a
sub-seed still consume it and stay comparable across configurations.
"""

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .boosting import GBTClassifier, GBTRegressor, TrainParams
from .ceal import CealConfig, PseudoLabelSet, filter_classification, filter_regression
from .data import gen_blobs, gen_friedman1, load_csv, load_schema, train_test_split
from .encoding import TableEncoder
from .metrics import accuracy, auc, auc_macro, mse, r2
from .sampling import gsx_select, random_select, select_top_m
from .uncertainty import entropy, ibug_uncertainty, staged_std, ve_classification, \
    ve_regression_std
from .validation import check_fraction, check_positive_int

CLASSIFICATION_STRATEGIES = ("entropy", "ve_total", "ve_data", "ve_knowledge")
REGRESSION_STRATEGIES = ("ve_regression", "ibug")
SHARED_STRATEGIES = ("random", "staged_std", "gsx")
STRATEGIES = CLASSIFICATION_STRATEGIES + REGRESSION_STRATEGIES + SHARED_STRATEGIES

CURVE_HEADER = ["strategy", "ceal_mode", "seed", "iteration", "n_labelled",
                "n_pseudo", "metric", "value"]
AGGREGATE_HEADER = ["strategy", "ceal_mode", "iteration", "n_labelled", "metric",
                    "mean", "se", "n_seeds"]

_SEED_BOUND = 2**31 - 1


@dataclass(frozen=True)
class DatasetSource:
    """Where the experiment data comes from: a CSV pair or a synthetic generator."""

    kind: str
    path: str = None
    schema_path: str = None
    n_classes: int = None
    n_rows: int = None
    n_features: int = None
    separation: float = None
    noise_sd: float = None
    seed: int = 0

    _FIELDS = {
        "csv": ("path", "schema_path", "n_classes"),
        "blobs": ("n_rows", "n_features", "n_classes", "separation", "seed"),
        "friedman1": ("n_rows", "noise_sd", "seed"),
    }
    _REQUIRED = {
        "csv": ("path", "schema_path"),
        "blobs": ("n_rows", "n_features", "n_classes", "separation"),
        "friedman1": ("n_rows", "noise_sd"),
    }

    def __post_init__(self):
        if self.kind not in self._FIELDS:
            raise ValueError(
                f"dataset kind must be one of {sorted(self._FIELDS)}, got {self.kind!r}")
        for name in self._REQUIRED[self.kind]:
            if getattr(self, name) is None:
                raise ValueError(f"dataset kind {self.kind!r} requires field {name!r}")

    def to_dict(self):
        doc = {"kind": self.kind}
        for name in self._FIELDS[self.kind]:
            doc[name] = getattr(self, name)
        return doc

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ValueError("dataset source must be an object with a 'kind' field")
        kind = doc["kind"]
        if kind not in cls._FIELDS:
            raise ValueError(
                f"dataset kind must be one of {sorted(cls._FIELDS)}, got {kind!r}")
        extra = set(doc) - {"kind"} - set(cls._FIELDS[kind])
        if extra:
            raise ValueError(f"unknown dataset fields for kind {kind!r}: {sorted(extra)}")
        return cls(**doc)


def load_dataset(source):
    if source.kind == "csv":
        schema = load_schema(source.schema_path)
        return load_csv(source.path, schema, n_classes=source.n_classes)
    if source.kind == "blobs":
        return gen_blobs(source.n_rows, source.n_features, source.n_classes,
                         source.separation, source.seed)
    return gen_friedman1(source.n_rows, source.noise_sd, source.seed)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSource
    task: str
    strategy: str
    ceal: CealConfig = CealConfig()
    initial_fraction: float = 0.2
    batch_fraction: float = 0.2
    budget: int = None
    train: TrainParams = TrainParams()
    ve_members: int = 10
    ibug_k: int = 20
    seeds: tuple = (0,)
    test_fraction: float = 0.2

    def __post_init__(self):
        if self.task not in ("classification", "regression"):
            raise ValueError(f"task must be classification or regression, got {self.task!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {sorted(STRATEGIES)}, "
                             f"got {self.strategy!r}")
        if self.task == "classification" and self.strategy in REGRESSION_STRATEGIES:
            raise ValueError(
                f"strategy: {self.strategy!r} is regression-only, task is classification")
        if self.task == "regression" and self.strategy in CLASSIFICATION_STRATEGIES:
            raise ValueError(
                f"strategy: {self.strategy!r} is classification-only, task is regression")
        check_fraction(self.initial_fraction, "initial_fraction")
        check_fraction(self.batch_fraction, "batch_fraction")
        check_fraction(self.test_fraction, "test_fraction")
        if self.budget is not None:
            check_positive_int(self.budget, "budget", minimum=0)
        check_positive_int(self.ve_members, "ve_members")
        check_positive_int(self.ibug_k, "ibug_k", minimum=2)
        if self.strategy == "staged_std" and self.train.n_stages < 2:
            raise ValueError("strategy: staged_std needs train.n_stages >= 2")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ValueError("seeds must be a non-empty list")
        object.__setattr__(self, "seeds", seeds)

    def to_dict(self):
        return {
            "dataset": self.dataset.to_dict(),
            "task": self.task,
            "strategy": self.strategy,
            "ceal": self.ceal.to_dict(),
            "initial_fraction": self.initial_fraction,
            "batch_fraction": self.batch_fraction,
            "budget": self.budget,
            "train": self.train.kwargs(),
            "ve_members": self.ve_members,
            "ibug_k": self.ibug_k,
            "seeds": list(self.seeds),
            "test_fraction": self.test_fraction,
        }

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ValueError("config must be a JSON object")
        known = {"dataset", "task", "strategy", "ceal", "initial_fraction",
                 "batch_fraction", "budget", "train", "ve_members", "ibug_k",
                 "seeds", "test_fraction"}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        for name in ("dataset", "task", "strategy"):
            if name not in doc:
                raise ValueError(f"config is missing required field {name!r}")
        kwargs = {
            "dataset": DatasetSource.from_dict(doc["dataset"]),
            "task": doc["task"],
            "strategy": doc["strategy"],
        }
        if "ceal" in doc:
            kwargs["ceal"] = CealConfig.from_dict(doc["ceal"])
        if "train" in doc:
            train_doc = doc["train"]
            known_train = set(TrainParams().kwargs())
            extra = set(train_doc) - known_train
            if extra:
                raise ValueError(f"unknown train fields: {sorted(extra)}")
            kwargs["train"] = TrainParams(**train_doc)
        for name in ("initial_fraction", "batch_fraction", "budget", "ve_members",
                     "ibug_k", "seeds", "test_fraction"):
            if name in doc:
                kwargs[name] = doc[name]
        return cls(**kwargs)

    def fingerprint(self):
        """sha256 of the canonical resolved-config JSON."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    n_labelled: int
    n_pseudo: int
    metrics: dict
    wall_time: float


@dataclass(frozen=True)
class LearningCurve:
    config_fingerprint: str
    seed: int
    records: list
    final_labelled_idx: np.ndarray = field(default=None, repr=False)


def _make_model(config, dataset, model_seed):
    kwargs = config.train.kwargs()
    kwargs["random_state"] = model_seed
    if config.task == "classification":
        return GBTClassifier(n_classes=dataset.n_classes, **kwargs)
    return GBTRegressor(**kwargs)


def _evaluate(config, dataset, model, X_test, test_idx):
    if config.task == "classification":
        y_test = dataset.labels_int(test_idx)
        proba = model.predict_proba(X_test)
        preds = np.argmax(proba, axis=1)
        if dataset.n_classes == 2:
            auc_value = auc(proba[:, 1], y_test.astype(np.float64))
        else:
            auc_value = auc_macro(proba, y_test)
        return {"accuracy": accuracy(preds, y_test), "auc": auc_value}
    y_test = dataset.labels[test_idx]
    preds = model.predict(X_test)
    return {"mse": mse(preds, y_test), "r2": r2(preds, y_test)}


def _regression_uncertainty(config, model, X_pool, encoder, dataset, labelled_idx):
    """Pool uncertainty for regression pseudo-labelling, matched to the
    query strategy when the strategy is itself an uncertainty."""
    if config.strategy == "staged_std":
        return staged_std(model, X_pool)
    if config.strategy == "ibug":
        X_lab = encoder.transform(dataset, labelled_idx)
        return ibug_uncertainty(model.leaf_indices(X_lab),
                                dataset.labels[labelled_idx],
                                model.leaf_indices(X_pool), config.ibug_k)
    return ve_regression_std(model, X_pool, config.ve_members)


def _score_pool(config, model, dataset, encoder, labelled_idx, pool_idx,
                select_seed, batch):
    if config.strategy == "random":
        return random_select(pool_idx, batch, select_seed)
    if config.strategy == "gsx":
        return gsx_select(encoder.transform(dataset), labelled_idx, pool_idx, batch)
    X_pool = encoder.transform(dataset, pool_idx)
    if config.strategy == "entropy":
        scores = entropy(model.predict_proba(X_pool))
    elif config.strategy == "staged_std":
        scores = staged_std(model, X_pool)
    elif config.strategy in ("ve_total", "ve_data", "ve_knowledge"):
        triple = ve_classification(model, X_pool, config.ve_members)
        scores = getattr(triple, config.strategy[3:])
    elif config.strategy == "ve_regression":
        scores = ve_regression_std(model, X_pool, config.ve_members)
    else:
        X_lab = encoder.transform(dataset, labelled_idx)
        scores = ibug_uncertainty(model.leaf_indices(X_lab),
                                  dataset.labels[labelled_idx],
                                  model.leaf_indices(X_pool), config.ibug_k)
    return select_top_m(scores, batch, pool_idx)


def _pseudo_labels(config, model, dataset, encoder, labelled_idx, pool_idx,
                   iteration):
    if config.ceal.mode == "none" or pool_idx.size == 0:
        return PseudoLabelSet.empty(iteration)
    X_pool = encoder.transform(dataset, pool_idx)
    if config.task == "classification":
        probs = model.predict_proba(X_pool)
        ent = entropy(probs)
        unc = None
        if config.ceal.mode in ("mceal", "hybrid"):
            unc = ve_classification(model, X_pool, config.ve_members).knowledge
        return filter_classification(probs, ent, unc, config.ceal,
                                     pool_idx=pool_idx, iteration=iteration)
    preds = model.predict(X_pool)
    unc = _regression_uncertainty(config, model, X_pool, encoder, dataset,
                                  labelled_idx)
    return filter_regression(preds, unc, config.ceal, pool_idx=pool_idx,
                             iteration=iteration)


def run_experiment(config, seed):
    """Run one seeded active-learning experiment and return its learning curve."""
    dataset = load_dataset(config.dataset)
    if dataset.task != config.task:
        raise ValueError(
            f"task: config says {config.task!r} but dataset is {dataset.task!r}")
    if np.any(np.isnan(dataset.labels)):
        raise ValueError("experiment dataset must be fully labelled "
                         "(the harness simulates the oracle)")

    rng = np.random.default_rng(seed)

    def draw():
        return int(rng.integers(0, _SEED_BOUND))

    split_seed = draw()
    init_seed = draw()
    split = train_test_split(dataset, config.test_fraction, split_seed)
    train_idx, test_idx = split.train_idx, split.test_idx
    n_train = train_idx.shape[0]
    n_init = max(1, round(config.initial_fraction * n_train))
    batch = max(1, round(config.batch_fraction * n_train))

    labelled = np.sort(random_select(train_idx, n_init, init_seed))
    pool = np.setdiff1d(train_idx, labelled)
    pseudo = PseudoLabelSet.empty()
    records = []
    iteration = 0

    while True:
        started = time.perf_counter()
        model_seed = draw()
        encoder = TableEncoder().fit(dataset, labelled)
        fit_idx = np.concatenate([labelled, pseudo.indices])
        X_fit = encoder.transform(dataset, fit_idx)
        if config.task == "classification":
            y_fit = np.concatenate([dataset.labels_int(labelled),
                                    pseudo.labels.astype(np.int64)])
        else:
            y_fit = np.concatenate([dataset.labels[labelled], pseudo.labels])
        model = _make_model(config, dataset, model_seed).fit(X_fit, y_fit)

        metrics = _evaluate(config, dataset, model,
                            encoder.transform(dataset, test_idx), test_idx)
        records.append(IterationRecord(iteration, labelled.shape[0], len(pseudo),
                                       metrics, time.perf_counter() - started))

        if pool.size == 0 or (config.budget is not None
                              and iteration >= config.budget):
            break
        select_seed = draw()
        chosen = _score_pool(config, model, dataset, encoder, labelled, pool,
                             select_seed, batch)
        labelled = np.sort(np.concatenate([labelled, chosen]))
        pool = np.setdiff1d(pool, chosen)
        iteration += 1
        pseudo = _pseudo_labels(config, model, dataset, encoder, labelled, pool,
                                iteration)

    return LearningCurve(config.fingerprint(), int(seed), records,
                         final_labelled_idx=labelled)


def run_seeds(config, threads=1):
    """Run config.seeds, optionally in parallel; output order follows the list."""
    seeds = list(config.seeds)
    if threads <= 1 or len(seeds) <= 1:
        return [run_experiment(config, s) for s in seeds]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run_experiment, config, s) for s in seeds]
        return [f.result() for f in futures]


def _metric_names(curves):
    names = sorted(curves[0].records[0].metrics)
    for curve in curves:
        for record in curve.records:
            if sorted(record.metrics) != names:
                raise ValueError("curves disagree on metric names")
    return names


def _check_curves(curves):
    curves = list(curves)
    if not curves:
        raise ValueError("no curves to aggregate")
    fp = curves[0].config_fingerprint
    if any(c.config_fingerprint != fp for c in curves):
        raise ValueError("curves come from different config fingerprints")
    n_records = len(curves[0].records)
    if any(len(c.records) != n_records for c in curves):
        raise ValueError("curves have mismatched record counts")
    return curves


@dataclass(frozen=True)
class AggregateRecord:
    iteration: int
    n_labelled: float
    n_pseudo: float
    metrics: dict  # name -> (mean, se, n_seeds); (None, None, 0) when absent


def aggregate_seeds(curves):
    """Per-iteration mean and standard error of each metric across seeds."""
    curves = _check_curves(curves)
    names = _metric_names(curves)
    out = []
    for i in range(len(curves[0].records)):
        rows = [c.records[i] for c in curves]
        stats = {}
        for name in names:
            values = [r.metrics[name] for r in rows if r.metrics[name] is not None]
            if not values:
                stats[name] = (None, None, 0)
                continue
            mean = float(np.mean(values))
            se = 0.0 if len(values) == 1 else \
                float(np.std(values, ddof=1) / np.sqrt(len(values)))
            stats[name] = (mean, se, len(values))
        out.append(AggregateRecord(rows[0].iteration,
                                   float(np.mean([r.n_labelled for r in rows])),
                                   float(np.mean([r.n_pseudo for r in rows])),
                                   stats))
    return out


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_curves_csv(path, config, curves):
    """One row per metric per iteration per seed, ordered by
    (seed, iteration, metric name)."""
    curves = sorted(curves, key=lambda c: c.seed)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for curve in curves:
            for record in curve.records:
                for name in sorted(record.metrics):
                    writer.writerow([
                        config.strategy, config.ceal.mode, curve.seed,
                        record.iteration, record.n_labelled, record.n_pseudo,
                        name, _fmt(record.metrics[name]),
                    ])


def write_aggregate_csv(path, config, aggregates):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_HEADER)
        for agg in aggregates:
            for name in sorted(agg.metrics):
                mean, se, n_seeds = agg.metrics[name]
                writer.writerow([
                    config.strategy, config.ceal.mode, agg.iteration,
                    _fmt(agg.n_labelled), name, _fmt(mean), _fmt(se), n_seeds,
                ])
