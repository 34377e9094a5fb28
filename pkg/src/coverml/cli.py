"""Command-line surface: ingest, sample, split, synth, train, evaluate,
benchmark, importance, predict.

All randomness flows from --seed; identical invocations produce identical
output files (no timestamps are written anywhere).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import models
from .datasets import (
    DEFAULT_LABEL_SOURCE,
    DEFAULT_POSITIVE_VALUES,
    SynthSpec,
    derive_label,
    generate_synthetic,
    generate_xor,
    sample_rows,
    train_test_split,
)
from .metrics import MetricError, curve_to_csv
from .models import ModelError, feature_importances
from .persist import ModelFileError, load_model, read_header, save_model
from .selection import (
    CVConfig,
    SelectionError,
    benchmark,
    build_param_grid,
    cross_validate,
    default_grid,
    evaluate_fitted,
)
from .stages import FittedPipeline, PipelineError, PipelineSpec, default_pipeline_spec
from .table import DataTable, TableError, read_csv, schema_from_json, schema_to_json, write_csv


class CliError(Exception):
    pass


def _load_table(path) -> DataTable:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such table file: {p}")
    return DataTable.from_json_bytes(p.read_bytes())


def _save_table(table: DataTable, path) -> None:
    Path(path).write_bytes(table.to_json_bytes())


def _read_text(path, what: str) -> str:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no such {what} file: {p}")
    return p.read_text(encoding="utf-8")


def _print_table(rows: list[tuple[str, str]], headers: tuple[str, str]) -> None:
    width = max(len(headers[0]), *(len(r[0]) for r in rows))
    print(f"{headers[0].ljust(width)}  {headers[1]}")
    for name, value in rows:
        print(f"{name.ljust(width)}  {value}")


# -- commands ---------------------------------------------------------------


def cmd_ingest(args) -> int:
    schema = schema_from_json(_read_text(args.schema, "schema"))
    table = read_csv(args.input, schema, delimiter=args.delimiter, header=not args.no_header)
    if args.derive_label:
        positives = [v for v in args.positive_values.split(",") if v]
        table = derive_label(table, args.label_source, positives)
    _save_table(table, args.out)
    print(f"rows: {table.row_count}")
    for name, nulls in table.null_counts().items():
        print(f"nulls[{name}]: {nulls}")
    print(f"wrote {args.out}")
    return 0


def cmd_sample(args) -> int:
    table = _load_table(args.data)
    out = sample_rows(table, args.fraction, args.seed)
    _save_table(out, args.out)
    print(f"sampled {out.row_count} of {table.row_count} rows -> {args.out}")
    return 0


def cmd_split(args) -> int:
    table = _load_table(args.data)
    train, test = train_test_split(table, args.test_fraction, args.seed)
    _save_table(train, args.train_out)
    _save_table(test, args.test_out)
    print(f"train: {train.row_count} rows -> {args.train_out}")
    print(f"test:  {test.row_count} rows -> {args.test_out}")
    return 0


def cmd_synth(args) -> int:
    if args.kind == "benefits":
        if args.spec:
            spec = SynthSpec.from_json(_read_text(args.spec, "synth spec"))
        else:
            spec = SynthSpec(row_count=args.rows, positive_rate=args.positive_rate, seed=args.seed)
        table = generate_synthetic(spec)
    else:
        table = generate_xor(args.rows, args.seed, flip_rate=args.flip_rate)
    _save_table(table, args.out)
    if args.csv_out:
        write_csv(table, args.csv_out)
    if args.schema_out:
        Path(args.schema_out).write_text(schema_to_json(table.schema), encoding="utf-8")
    print(f"generated {table.row_count} rows ({args.kind}) -> {args.out}")
    return 0


def _resolve_pipeline_spec(args, table: DataTable) -> PipelineSpec:
    if args.pipeline:
        return PipelineSpec.from_json(_read_text(args.pipeline, "pipeline spec"))
    exclude = tuple(c for c in args.exclude.split(",") if c)
    return default_pipeline_spec(table, exclude=exclude)


def _resolve_cv_config(args) -> CVConfig:
    if getattr(args, "cv_config", None):
        return CVConfig.from_json(_read_text(args.cv_config, "CV config"))
    return CVConfig(folds=args.folds, metric=args.metric, seed=args.seed, parallelism=args.threads)


def _resolve_grid(family: str, grid_path) -> list:
    if not grid_path:
        return default_grid(family)
    doc = json.loads(_read_text(grid_path, "grid"))
    axes = doc.get("axes", doc if isinstance(doc, dict) else {})
    base_over = doc.get("base", {}) if "axes" in doc else {}
    base = models.params_from_dict(family, base_over) if base_over else models.default_params(family)
    return build_param_grid(base, axes)


def cmd_train(args) -> int:
    family = models.check_family(args.model)
    table = _load_table(args.data)
    source_fp = table.fingerprint()
    train_part, test_part = train_test_split(table, args.test_fraction, args.seed)
    if args.test_out:
        _save_table(test_part, args.test_out)
    spec = _resolve_pipeline_spec(args, train_part)
    grid = _resolve_grid(family, args.grid)
    config = _resolve_cv_config(args)
    cv = cross_validate(spec, family, grid, train_part, config)
    save_model(
        cv.model,
        args.out,
        seed=args.seed,
        data_fingerprint=train_part.fingerprint(),
        source_fingerprint=source_fp,
    )
    print(f"fit_minutes: {cv.fit_minutes}")
    print(f"best_params: {json.dumps(models.params_to_dict(cv.best_params), sort_keys=True)}")
    print(f"best_{config.metric}: {cv.best_mean_metric}")
    print(f"wrote {args.out}")
    return 0


def _require_pipeline(model) -> FittedPipeline:
    if not isinstance(model, FittedPipeline) or model.classifier is None:
        raise CliError("model file does not contain a fitted pipeline with a classifier")
    return model


def _write_predictions(out_table: DataTable, path) -> None:
    features = out_table.column("features")
    preds = out_table.column("prediction")
    labels = out_table.column("trueLabel") if out_table.has_column("trueLabel") else None
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("features,prediction,trueLabel\n")
        for i in range(out_table.row_count):
            label = "" if labels is None else repr(labels[i])
            fh.write(f'"{features[i].display()}",{preds[i]!r},{label}\n')


def cmd_evaluate(args) -> int:
    model, header = load_model(args.model)
    fitted = _require_pipeline(model)
    table = _load_table(args.data)
    fp = table.fingerprint()
    in_sample = fp in (header.get("data_fingerprint"), header.get("source_fingerprint"))
    metadata = {"in_sample": in_sample, "family": fitted.family, "data_fingerprint": fp}
    report = evaluate_fitted(fitted, table, metadata=metadata)
    c = report.counts
    _print_table(
        [
            ("TP", repr(float(c.tp))),
            ("FP", repr(float(c.fp))),
            ("TN", repr(float(c.tn))),
            ("FN", repr(float(c.fn))),
            ("Precision", repr(report.precision)),
            ("Recall", repr(report.recall)),
        ],
        ("metric", "value"),
    )
    if in_sample:
        print("note: evaluated in-sample (data matches the model's training data)")
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
        print(f"wrote {args.out}")
    if args.predictions:
        _write_predictions(fitted.transform(table), args.predictions)
        print(f"wrote {args.predictions}")
    if args.roc_csv:
        curve_to_csv(report.roc_points, args.roc_csv, ("fpr", "tpr"))
        print(f"wrote {args.roc_csv}")
    if args.pr_csv:
        curve_to_csv(report.pr_points, args.pr_csv, ("recall", "precision"))
        print(f"wrote {args.pr_csv}")
    return 0


def cmd_predict(args) -> int:
    model, _ = load_model(args.model)
    fitted = _require_pipeline(model)
    table = _load_table(args.data)
    _write_predictions(fitted.transform(table), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_benchmark(args) -> int:
    table = _load_table(args.data)
    families = tuple(f for f in args.models.split(",") if f)
    for f in families:
        models.check_family(f)
    train_part, test_part = train_test_split(table, args.test_fraction, args.seed)
    spec = _resolve_pipeline_spec(args, train_part)
    grids = None
    if args.grids:
        doc = json.loads(_read_text(args.grids, "grids"))
        grids = {
            fam: build_param_grid(models.default_params(fam), axes) for fam, axes in doc.items()
        }
    config = _resolve_cv_config(args)
    report = benchmark(train_part, test_part, spec, families, config, grids)
    text = report.to_text()
    print(text)
    if args.out_json:
        Path(args.out_json).write_text(report.to_json(), encoding="utf-8")
    if args.out_text:
        Path(args.out_text).write_text(text + "\n", encoding="utf-8")
    return 1 if report.failed else 0


def cmd_importance(args) -> int:
    model, _ = load_model(args.model)
    if isinstance(model, FittedPipeline):
        if model.classifier is None:
            raise CliError("pipeline has no trained classifier")
        ranking = feature_importances(model.classifier, names=model.feature_names)
    else:
        ranking = feature_importances(model)
    rows = [(str(rank), name, f"{value:.9f}") for rank, name, value in ranking.ranked()]
    widths = [
        max(len("Ranking"), *(len(r[0]) for r in rows)),
        max(len("Feature"), *(len(r[1]) for r in rows)),
    ]
    print(f"{'Ranking'.ljust(widths[0])}  {'Feature'.ljust(widths[1])}  Importance value")
    for rank, name, value in rows:
        print(f"{rank.ljust(widths[0])}  {name.ljust(widths[1])}  {value}")
    return 0


def cmd_header(args) -> int:
    header = read_header(args.model)
    header.pop("_body_offset", None)
    print(json.dumps(header, indent=2))
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coverml",
        description="Benefit-coverage classification engine: data prep, six model families, CV grid search, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a CSV against a schema into a table snapshot")
    p.add_argument("--input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--derive-label", action="store_true", help="append a 0/1 label column")
    p.add_argument("--label-source", default=DEFAULT_LABEL_SOURCE)
    p.add_argument("--positive-values", default=",".join(DEFAULT_POSITIVE_VALUES))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sample", help="seeded without-replacement row sample")
    p.add_argument("--data", required=True)
    p.add_argument("--fraction", type=float, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("split", help="seeded train/test partition")
    p.add_argument("--data", required=True)
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("synth", help="generate a seeded synthetic table")
    p.add_argument("--kind", choices=("benefits", "xor"), default="benefits")
    p.add_argument("--rows", type=int, default=10000)
    p.add_argument("--positive-rate", type=float, default=0.81)
    p.add_argument("--flip-rate", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--spec", help="JSON synth spec (overrides the other knobs)")
    p.add_argument("--out", required=True)
    p.add_argument("--csv-out")
    p.add_argument("--schema-out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="split, cross-validate a family over a grid, refit, save")
    p.add_argument("--data", required=True)
    p.add_argument("--pipeline", help="pipeline spec JSON (default: derived from the schema)")
    p.add_argument("--model", required=True, help="one of " + ",".join(models.FAMILY_ORDER))
    p.add_argument("--grid", help="grid JSON: axes (and optional base overrides)")
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--test-out", help="save the held-out split for later evaluation")
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--metric", choices=("auc_roc", "auc_pr"), default="auc_roc")
    p.add_argument("--cv-config", help="CV configuration JSON (overrides the fold/metric/seed/thread flags)")
    p.add_argument("--exclude", default=DEFAULT_LABEL_SOURCE,
                   help="comma-separated columns kept out of the derived default pipeline")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a labeled table and print the metric table")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="write the JSON evaluation report here")
    p.add_argument("--predictions", help="write per-row features,prediction,trueLabel CSV here")
    p.add_argument("--roc-csv", help="export the ROC curve as two-column CSV")
    p.add_argument("--pr-csv", help="export the PR curve as two-column CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="write per-row predictions for a table")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("benchmark", help="cross-validated sweep over model families")
    p.add_argument("--data", required=True)
    p.add_argument("--models", default=",".join(models.FAMILY_ORDER))
    p.add_argument("--pipeline")
    p.add_argument("--grids", help="JSON mapping family -> grid axes")
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--metric", choices=("auc_roc", "auc_pr"), default="auc_roc")
    p.add_argument("--cv-config", help="CV configuration JSON (overrides the fold/metric/seed/thread flags)")
    p.add_argument("--exclude", default=DEFAULT_LABEL_SOURCE,
                   help="comma-separated columns kept out of the derived default pipeline")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-json")
    p.add_argument("--out-text")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("importance", help="ranked feature importances of a tree-family model")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("header", help="print a model file's header metadata")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_header)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        CliError,
        TableError,
        PipelineError,
        SelectionError,
        MetricError,
        ModelError,
        ModelFileError,
        FileNotFoundError,
        ValueError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
