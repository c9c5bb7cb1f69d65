"""Command-line front end.

Subcommands: ``synth`` (generate a synthetic CSV + schema), ``run`` (execute
an experiment config over its seeds, writing curve/aggregate CSVs and a
manifest), ``train`` (fit one model on the labelled rows of a CSV),
``predict`` (apply a saved model bundle), and ``score`` (per-row uncertainty
scores from a saved model).

All failures exit nonzero after printing a single ``error: ...`` line to
stderr. Existing output files are never overwritten without --overwrite.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .boosting import GBTClassifier, TrainParams, load_model, make_estimator, \
    save_model
from .data import gen_blobs, gen_friedman1, load_csv, load_schema, save_csv, \
    save_schema
from .encoding import TableEncoder
from .harness import ExperimentConfig, aggregate_seeds, run_seeds, \
    write_aggregate_csv, write_curves_csv
from .uncertainty import entropy, ibug_uncertainty, staged_std, \
    ve_classification, ve_regression_std

THREADS_ENV = "ALBOOST_THREADS"

SCORE_STRATEGIES = {
    "classification": ("entropy", "staged_std", "ve_total", "ve_data",
                       "ve_knowledge"),
    "regression": ("staged_std", "ve_regression", "ibug"),
}


def _guard(path, overwrite):
    if Path(path).exists() and not overwrite:
        raise FileExistsError(f"{path} exists; pass --overwrite to replace it")


def _resolve_threads(flag_value):
    if flag_value is not None:
        threads = flag_value
    else:
        threads = int(os.environ.get(THREADS_ENV, "1"))
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_synth(args):
    out = Path(args.out)
    schema_path = out.with_suffix(".schema.json")
    _guard(out, args.overwrite)
    _guard(schema_path, args.overwrite)
    if args.kind == "blobs":
        dataset = gen_blobs(args.rows, args.features, args.classes,
                            args.separation, args.seed)
    else:
        dataset = gen_friedman1(args.rows, args.noise_sd, args.seed)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(dataset, out)
    save_schema(dataset.schema, schema_path)
    print(f"wrote {out} ({dataset.n_rows} rows) and {schema_path}")
    return 0


def cmd_run(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    config = ExperimentConfig.from_dict(doc)
    if args.seed is not None:
        config = ExperimentConfig.from_dict(
            {**config.to_dict(), "seeds": [args.seed]})
    threads = _resolve_threads(args.threads)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / "curves.csv"
    aggregate_path = out_dir / "aggregate.csv"
    manifest_path = out_dir / "manifest.json"
    for path in (curve_path, aggregate_path, manifest_path):
        _guard(path, args.overwrite)

    curves = run_seeds(config, threads)
    write_curves_csv(curve_path, config, curves)
    write_aggregate_csv(aggregate_path, config, aggregate_seeds(curves))
    manifest = {
        "format": "alboost-manifest",
        "version": 1,
        "tool_version": __version__,
        "config_path": str(args.config),
        "out_dir": str(out_dir),
        "seeds": list(config.seeds),
        "config_fingerprint": config.fingerprint(),
        "config": config.to_dict(),
        "outputs": {"curves": curve_path.name, "aggregate": aggregate_path.name},
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(f"wrote {curve_path}, {aggregate_path}, {manifest_path}")
    return 0


def _train_params(args):
    return TrainParams(
        n_stages=args.n_stages, learning_rate=args.learning_rate,
        max_depth=args.max_depth, min_samples_leaf=args.min_samples_leaf,
        subsample=args.subsample, langevin_noise_sd=args.langevin_noise_sd,
        max_thresholds_per_feature=args.max_thresholds, random_state=args.seed)


def cmd_train(args):
    _guard(args.out, args.overwrite)
    schema = load_schema(args.schema)
    dataset = load_csv(args.data, schema, n_classes=args.n_classes)
    labelled = np.flatnonzero(dataset.labelled_mask())
    if labelled.size == 0:
        raise ValueError(f"no labelled rows in {args.data}")
    encoder = TableEncoder().fit(dataset, labelled)
    X = encoder.transform(dataset, labelled)
    model = make_estimator(dataset.task, _train_params(args),
                           n_classes=dataset.n_classes)
    if dataset.task == "classification":
        model.fit(X, dataset.labels_int(labelled))
    else:
        model.fit(X, dataset.labels[labelled])
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_model(args.out, model, encoder=encoder, schema=dataset.schema)
    print(f"trained on {labelled.size} rows, wrote {args.out}")
    return 0


def _load_bundle_and_data(model_path, data_path):
    model, encoder, schema = load_model(model_path)
    if encoder is None or schema is None:
        raise ValueError(
            f"{model_path} has no encoder/schema; re-save it with both to "
            "use it from the command line")
    n_classes = model.n_classes_ if isinstance(model, GBTClassifier) else None
    dataset = load_csv(data_path, schema, n_classes=n_classes)
    return model, encoder, dataset


def cmd_predict(args):
    _guard(args.out, args.overwrite)
    model, encoder, dataset = _load_bundle_and_data(args.model, args.data)
    X = encoder.transform(dataset)
    if isinstance(model, GBTClassifier):
        proba = model.predict_proba(X)
        preds = np.argmax(proba, axis=1)
        header = ["row_index", "prediction"] + \
            [f"p{c}" for c in range(model.n_classes_)]
        rows = [[i, int(preds[i])] + [repr(float(v)) for v in proba[i]]
                for i in range(X.shape[0])]
    else:
        preds = model.predict(X)
        header = ["row_index", "prediction"]
        rows = [[i, repr(float(preds[i]))] for i in range(X.shape[0])]
    _write_rows(args.out, header, rows)
    print(f"wrote {len(rows)} predictions to {args.out}")
    return 0


def cmd_score(args):
    _guard(args.out, args.overwrite)
    model, encoder, dataset = _load_bundle_and_data(args.model, args.data)
    task = "classification" if isinstance(model, GBTClassifier) else "regression"
    if args.strategy not in SCORE_STRATEGIES[task]:
        raise ValueError(
            f"strategy {args.strategy!r} does not apply to a {task} model; "
            f"choose from {SCORE_STRATEGIES[task]}")
    X = encoder.transform(dataset)

    if args.strategy in ("ve_total", "ve_data", "ve_knowledge"):
        triple = ve_classification(model, X, args.ve_members)
        header = ["row_index", "total", "data", "knowledge"]
        rows = [[i, repr(float(triple.total[i])), repr(float(triple.data[i])),
                 repr(float(triple.knowledge[i]))] for i in range(X.shape[0])]
        _write_rows(args.out, header, rows)
        print(f"wrote {len(rows)} scores to {args.out}")
        return 0

    if args.strategy == "entropy":
        scores = entropy(model.predict_proba(X))
    elif args.strategy == "staged_std":
        scores = staged_std(model, X)
    elif args.strategy == "ve_regression":
        scores = ve_regression_std(model, X, args.ve_members)
    else:
        if args.train_data is None:
            raise ValueError("strategy ibug needs --train-data (the labelled "
                             "rows that define the leaf cache)")
        train_ds = load_csv(args.train_data, dataset.schema)
        labelled = np.flatnonzero(train_ds.labelled_mask())
        if labelled.size < 2:
            raise ValueError(f"--train-data {args.train_data} has fewer than "
                             "2 labelled rows")
        X_train = encoder.transform(train_ds, labelled)
        scores = ibug_uncertainty(model.leaf_indices(X_train),
                                  train_ds.labels[labelled],
                                  model.leaf_indices(X), args.ibug_k)
    rows = [[i, repr(float(scores[i]))] for i in range(X.shape[0])]
    _write_rows(args.out, ["row_index", "score"], rows)
    print(f"wrote {len(rows)} scores to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="alboost",
        description="Boosted-tree active learning: synthesize data, run "
                    "experiments, train, predict, and score uncertainty.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV + schema")
    p.add_argument("kind", choices=("blobs", "friedman1"))
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--features", type=int, default=2,
                   help="blobs only: feature count")
    p.add_argument("--classes", type=int, default=4, help="blobs only")
    p.add_argument("--separation", type=float, default=4.0, help="blobs only")
    p.add_argument("--noise-sd", type=float, default=1.0, help="friedman1 only")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="run an experiment config over its seeds")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="run this single seed instead of the config's list")
    p.add_argument("--threads", type=int, default=None,
                   help=f"parallel seed workers (default ${THREADS_ENV} or 1); "
                        "never changes output bytes")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train", help="fit one model on the labelled rows of a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True, help="output model JSON path")
    p.add_argument("--n-classes", type=int, default=None)
    p.add_argument("--n-stages", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--min-samples-leaf", type=int, default=5)
    p.add_argument("--subsample", type=float, default=1.0)
    p.add_argument("--langevin-noise-sd", type=float, default=0.0)
    p.add_argument("--max-thresholds", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("score", help="per-row uncertainty scores from a model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", required=True,
                   choices=sorted({s for v in SCORE_STRATEGIES.values() for s in v}))
    p.add_argument("--out", required=True)
    p.add_argument("--ve-members", type=int, default=10)
    p.add_argument("--ibug-k", type=int, default=20)
    p.add_argument("--train-data", default=None,
                   help="labelled CSV defining the ibug leaf cache")
    p.add_argument("--overwrite", action="store_true")
    p.set_defaults(func=cmd_score)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
