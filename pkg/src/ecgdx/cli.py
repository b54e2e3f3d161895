"""Command-line interface.

Exit codes: 0 success, 1 data/processing error (single-line message on
stderr), 2 usage error. Progress goes to stderr; data goes to --out files
or stdout, so runs are scriptable and reproducible byte for byte.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import (
    KnnConfig,
    MlpConfig,
    ModelKind,
    SvmConfig,
    load_model,
    predict,
    save_model,
    train_knn,
    train_mlp,
    train_naive_bayes,
    train_svm,
)
from .dataio import read_csv_record, read_wfdb_record, select_leads
from .dataio.wfdb import read_annotations_with_report
from .errors import ConfigError, EcgdxError
from .eval import (
    format_actual_predicted,
    confusion_csv,
    format_metrics_table,
    grid_search_svm,
    load_experiment_config,
    metrics_csv,
    run_cross_db,
    run_single_db,
)
from .features import ArConfig, ArMethod, extract_features, load_features_csv, save_features_csv
from .preprocess import FilterConfig, denoise_record
from .qrs import DetectorConfig, detect_r_peaks


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_or_stdout(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_record(args) -> tuple:
    """Record from --record (.hea) or --csv plus --rate."""
    if args.record:
        record = read_wfdb_record(args.record)
    elif args.csv:
        if not args.rate:
            raise ConfigError("--csv needs --rate")
        names = args.leads.split(",") if args.leads else None
        record = read_csv_record(args.csv, args.rate, names, header=args.csv_header)
    else:
        raise ConfigError("need --record or --csv")
    return record


def _denoised_lead(record, lead: str | None, cfg: FilterConfig):
    record = denoise_record(record, cfg)
    if lead:
        return record.lead(lead), record
    return record.leads[0], record


def cmd_ingest(args) -> int:
    record = _load_record(args)
    lines = [
        f"record,{record.record_id}",
        f"sampling_rate_hz,{record.sampling_rate_hz}",
        f"duration_samples,{record.duration_samples}",
        f"leads,{'|'.join(record.lead_names)}",
    ]
    if args.annotations:
        beats, skipped = read_annotations_with_report(args.annotations, record)
        lines.append(f"beat_annotations,{len(beats)}")
        per_class: dict[str, int] = {}
        for b in beats:
            per_class[b.label.value] = per_class.get(b.label.value, 0) + 1
        for name in sorted(per_class):
            lines.append(f"beats_{name},{per_class[name]}")
        for symbol in sorted(skipped):
            lines.append(f"skipped_{symbol},{skipped[symbol]}")
    _write_or_stdout("\n".join(lines) + "\n", args.out)
    return 0


def cmd_detect(args) -> int:
    record = _load_record(args)
    lead, _ = _denoised_lead(record, args.lead, FilterConfig())
    _progress(f"detecting on lead {lead.lead_name} ({len(lead)} samples at {record.sampling_rate_hz} Hz)")
    result = detect_r_peaks(lead, record.sampling_rate_hz, DetectorConfig(), keep_trace=bool(args.dump_stages))
    if args.dump_stages:
        t = result.trace
        rows = ["filtered,derivative,squared,integrated,threshold"]
        for i in range(t.filtered.size):
            rows.append(
                f"{t.filtered[i]!r},{t.derivative[i]!r},{t.squared[i]!r},"
                f"{t.integrated[i]!r},{t.threshold[i]!r}"
            )
        Path(args.dump_stages).write_text("\n".join(rows) + "\n")
    _write_or_stdout("r_index\n" + "".join(f"{int(r)}\n" for r in result.r_peaks), args.out)
    _progress(f"{result.r_peaks.size} R peaks")
    return 0


def cmd_features(args) -> int:
    record = _load_record(args)
    leads = args.leads.split(",") if args.leads else record.lead_names[:2]
    record = select_leads(record, leads)
    denoised = denoise_record(record, FilterConfig())
    ar_cfg = ArConfig(order=args.ar_order, method=ArMethod(args.ar_method))

    labels = None
    if args.annotations:
        beats = read_annotations_with_report(args.annotations, record)[0]
        r_indices = [b.sample_index for b in beats]
        labels = [b.label for b in beats]
    else:
        detection = detect_r_peaks(denoised.leads[0], record.sampling_rate_hz, DetectorConfig())
        r_indices = [int(r) for r in detection.r_peaks]

    result = extract_features(denoised, r_indices, leads, ar_cfg, labels)
    if not args.out:
        raise ConfigError("features needs --out")
    save_features_csv(args.out, result)
    _progress(f"{len(result.vectors)} beats featurized, {result.n_skipped} skipped")
    return 0


def cmd_train(args) -> int:
    X, labels, _ = load_features_csv(args.features)
    if any(label is None for label in labels):
        raise EcgdxError(f"{args.features}: unlabeled rows cannot train a model")
    standardize = not args.no_standardize
    if args.classifier == "svm":
        model = train_svm(X, labels, SvmConfig(C=args.svm_c, gamma=args.svm_gamma), standardize=standardize)
    elif args.classifier == "knn":
        model = train_knn(X, labels, KnnConfig(k=args.knn_k, p=args.knn_p), standardize=standardize)
    elif args.classifier == "mlp":
        hidden = tuple(int(h) for h in args.mlp_hidden.split(","))
        model = train_mlp(
            X,
            labels,
            MlpConfig(hidden_layers=hidden, epochs=args.mlp_epochs, seed=args.seed),
            standardize=standardize,
        )
    else:
        model = train_naive_bayes(X, labels, standardize=standardize)
    save_model(model, args.model)
    _progress(f"trained {args.classifier} on {X.shape[0]} beats -> {args.model}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    X, _, _ = load_features_csv(args.features)
    labels = predict(model, X)
    text = "prediction\n" + "".join(f"{l.value if hasattr(l, 'value') else l}\n" for l in labels)
    _write_or_stdout(text, args.out)
    return 0


def _write_reports(result, out_dir: str | None, fmt: str, cross: bool = False) -> None:
    table = format_metrics_table(result.report)
    if cross:
        table += "\n\n" + format_actual_predicted(result.confusion)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_text(metrics_csv(result.report))
        (out / "confusion.csv").write_text(confusion_csv(result.confusion))
        (out / "metrics.txt").write_text(table + "\n")
    if fmt == "csv":
        sys.stdout.write(metrics_csv(result.report))
    else:
        sys.stdout.write(table + "\n")


def cmd_eval_single(args) -> int:
    overrides = {"seed": args.seed, "threads": args.threads, "classifier": args.classifier}
    if args.no_standardize:
        overrides["standardize"] = "false"
    cfg = load_experiment_config(args.config, overrides)
    _progress(f"single-database run: classifier={cfg.classifier} seed={cfg.seed}")
    result = run_single_db(cfg)
    _progress(f"train beats: {result.n_train}, test beats: {result.n_test}")
    _write_reports(result, args.out, args.format)
    return 0


def cmd_eval_cross(args) -> int:
    overrides = {"seed": args.seed, "threads": args.threads}
    train_cfg = load_experiment_config(args.train_config, overrides)
    test_cfg = load_experiment_config(args.test_config, {"threads": args.threads})
    _progress(f"cross-database run: train={train_cfg.classifier} on {train_cfg.database}")
    result = run_cross_db(train_cfg, test_cfg)
    if args.model:
        save_model(result.model, args.model)
    _write_reports(result, args.out, args.format, cross=True)
    return 0


def cmd_grid_search(args) -> int:
    X, labels, _ = load_features_csv(args.features)
    if any(label is None for label in labels):
        raise EcgdxError(f"{args.features}: unlabeled rows cannot drive grid search")
    C_grid = [float(v) for v in args.c_grid.split(",")]
    gamma_grid = [float(v) for v in args.gamma_grid.split(",")]
    best = grid_search_svm(X, labels, C_grid, gamma_grid, folds=args.folds, seed=args.seed)
    _write_or_stdout(f"C,{best.C!r}\ngamma,{best.gamma!r}\n", args.out)
    return 0


def _add_record_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--record", help="WFDB header (.hea) path")
    p.add_argument("--csv", help="CSV waveform path (one column per lead)")
    p.add_argument("--rate", type=int, help="sampling rate for --csv")
    p.add_argument("--csv-header", action="store_true", help="CSV first row is lead names")
    p.add_argument("--leads", help="comma-separated lead names")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecgdx", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ecgdx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a record and report its shape")
    _add_record_flags(p)
    p.add_argument("--annotations", help="annotation (.atr) path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("detect", help="denoise and detect R peaks")
    _add_record_flags(p)
    p.add_argument("--lead", help="lead to detect on (default: first)")
    p.add_argument("--out", help="peaks CSV (default stdout)")
    p.add_argument("--dump-stages", help="CSV of detector stage outputs")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("features", help="segment beats and write the feature CSV")
    _add_record_flags(p)
    p.add_argument("--annotations", help="use annotated R locations and labels")
    p.add_argument("--ar-order", type=int, default=4)
    p.add_argument("--ar-method", default="burg", choices=[m.value for m in ArMethod])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train a classifier from a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--classifier", required=True, choices=["svm", "knn", "mlp", "nb"])
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--svm-c", type=float, default=SvmConfig().C)
    p.add_argument("--svm-gamma", type=float, default=SvmConfig().gamma)
    p.add_argument("--knn-k", type=int, default=KnnConfig().k)
    p.add_argument("--knn-p", type=float, default=KnnConfig().p)
    p.add_argument("--mlp-hidden", default="100,50")
    p.add_argument("--mlp-epochs", type=int, default=MlpConfig().epochs)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify beats in a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval-single", help="single-database experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--classifier", choices=["svm", "knn", "mlp", "nb"])
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--out", help="directory for metrics.csv/confusion.csv/metrics.txt")
    p.add_argument("--format", choices=["csv", "txt"], default="txt")
    p.set_defaults(func=cmd_eval_single)

    p = sub.add_parser("eval-cross", help="train on one database, test on another")
    p.add_argument("--train-config", required=True)
    p.add_argument("--test-config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--model", help="save the trained model here")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "txt"], default="txt")
    p.set_defaults(func=cmd_eval_cross)

    p = sub.add_parser("grid-search", help="cross-validated SVM grid search on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--c-grid", required=True, help="comma-separated C values")
    p.add_argument("--gamma-grid", required=True, help="comma-separated gamma values")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_grid_search)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EcgdxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
