"""Experiment drivers: dataset assembly from disk, the single-database
70/30 protocol, the cross-database train-here/test-there protocol, and
SVM grid search.

Experiment configs are plain-text key=value files; see the README for the
key reference. CLI flags override file values.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..classify import (
    KnnConfig,
    MlpConfig,
    SvmConfig,
    TrainedModel,
    predict,
    train_knn,
    train_mlp,
    train_naive_bayes,
    train_svm,
)
from ..dataio import (
    BeatClass,
    EcgRecord,
    read_csv_record,
    read_wfdb_annotations,
    read_wfdb_record,
    record_paths,
    select_leads,
)
from ..dataio.wfdb import data_dir_from_env
from ..errors import ConfigError, EcgdxError
from ..features import ArConfig, ArMethod, ExtractionResult, extract_features
from ..preprocess import FilterConfig, denoise_record, resample_record
from ..qrs import DetectorConfig, detect_r_peaks, match_annotations
from .metrics import ConfusionMatrix, MetricsReport, compute_metrics
from .split import split, stratified_folds


@dataclass
class ExperimentConfig:
    database: str = "wfdb"  # "wfdb" (class-source records) or "csvdir" (manifest)
    data_dir: Path | None = None
    class_sources: dict[BeatClass, tuple[str, ...]] = field(default_factory=dict)
    manifest: Path | None = None
    csv_header: bool = True
    csv_rate_hz: int | None = None
    leads: tuple = (0, 1)  # names, or integer positions into the record
    split_fraction: float = 0.70
    seed: int = 1
    classifier: str = "svm"
    standardize: bool = True
    resample_to_hz: int | None = None
    r_source: str = "annotations"  # or "detector"
    match_tolerance_s: float = 0.150
    ar: ArConfig = field(default_factory=ArConfig)
    filter_cfg: FilterConfig = field(default_factory=FilterConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    knn: KnnConfig = field(default_factory=KnnConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError(f"split fraction must be in (0, 1), got {self.split_fraction}")
        if self.database not in ("wfdb", "csvdir"):
            raise ConfigError(f"unknown database kind {self.database!r}")
        if self.r_source not in ("annotations", "detector"):
            raise ConfigError(f"r_source must be 'annotations' or 'detector', got {self.r_source!r}")
        if self.classifier not in ("svm", "knn", "mlp", "nb"):
            raise ConfigError(f"unknown classifier {self.classifier!r}")


@dataclass
class AssembledDataset:
    X: np.ndarray
    y: list[BeatClass]
    rate_hz: int
    feature_names: list[str]
    n_skipped: int
    record_counts: dict[str, int]

    @property
    def classes(self) -> list[BeatClass]:
        return sorted(set(self.y), key=str)


@dataclass
class ExperimentResult:
    report: MetricsReport
    confusion: ConfusionMatrix
    model: TrainedModel
    n_train: int
    n_test: int


def _resolve_lead_names(record: EcgRecord, leads) -> list[str]:
    names = []
    for item in leads:
        if isinstance(item, int):
            if not 0 <= item < len(record.leads):
                raise ConfigError(
                    f"record {record.record_id!r} has {len(record.leads)} leads, no position {item}"
                )
            names.append(record.leads[item].lead_name)
        else:
            names.append(item)
    return names


def _prepare_record(record: EcgRecord, cfg: ExperimentConfig) -> EcgRecord:
    """Lead selection, optional resampling, then median denoising."""
    record = select_leads(record, _resolve_lead_names(record, cfg.leads))
    if cfg.resample_to_hz:
        record = resample_record(record, cfg.resample_to_hz)
    return denoise_record(record, cfg.filter_cfg)


def _features_for_wfdb_record(
    cfg: ExperimentConfig, record_id: str, wanted: BeatClass
) -> ExtractionResult:
    """One class-source record: beats of ``wanted`` only."""
    data_dir = data_dir_from_env(cfg.data_dir)
    if data_dir is None:
        raise ConfigError("no data directory: set data_dir or ECGDX_DATA_DIR")
    hea, atr = record_paths(data_dir, record_id)
    raw = read_wfdb_record(hea)
    annotations = read_wfdb_annotations(atr, raw)
    prepared = _prepare_record(raw, cfg)
    scale = prepared.sampling_rate_hz / raw.sampling_rate_hz

    if cfg.r_source == "annotations":
        r_indices = [int(round(a.sample_index * scale)) for a in annotations if a.label is wanted]
    else:
        detection = detect_r_peaks(prepared.leads[0], prepared.sampling_rate_hz, cfg.detector)
        scaled = [
            type(a)(int(round(a.sample_index * scale)), a.label) for a in annotations
        ]
        match = match_annotations(detection, scaled, prepared.sampling_rate_hz, cfg.match_tolerance_s)
        r_indices = [d for d, label in match.pairs if label is wanted]

    result = extract_features(prepared, r_indices, prepared.lead_names, cfg.ar, [wanted] * len(r_indices))
    return result


def _features_for_csv_record(
    cfg: ExperimentConfig, path: Path, label: BeatClass, rate_hz: int
) -> ExtractionResult:
    """One rhythm-labeled CSV record: every detected beat gets the label."""
    raw = read_csv_record(path, rate_hz, header=cfg.csv_header)
    prepared = _prepare_record(raw, cfg)
    detection = detect_r_peaks(prepared.leads[0], prepared.sampling_rate_hz, cfg.detector)
    r_indices = [int(r) for r in detection.r_peaks]
    return extract_features(prepared, r_indices, prepared.lead_names, cfg.ar, [label] * len(r_indices))


def read_manifest(manifest: Path) -> list[tuple[Path, BeatClass, int | None]]:
    """Rows of (record path, label, rate or None); paths resolve relative
    to the manifest location. Columns: record,label[,rate_hz]; header optional.
    """
    rows = []
    with open(manifest, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            if i == 0 and row[0].strip().lower() in ("record", "path", "file"):
                continue
            if len(row) < 2:
                raise ConfigError(f"{manifest}: row {i + 1} needs record,label")
            path = Path(row[0].strip())
            if not path.is_absolute():
                path = manifest.parent / path
            rate = int(row[2]) if len(row) > 2 and row[2].strip() else None
            rows.append((path, BeatClass.parse(row[1]), rate))
    if not rows:
        raise ConfigError(f"{manifest}: no records listed")
    return rows


def assemble_dataset(cfg: ExperimentConfig) -> AssembledDataset:
    """Run ingestion + preprocessing + feature extraction over every
    configured record, in a fixed order (parallel across records when
    cfg.threads > 1; output order does not depend on thread count).
    """
    jobs = []
    if cfg.database == "wfdb":
        if not cfg.class_sources:
            raise ConfigError("wfdb experiment needs records.<Class> entries")
        for label in sorted(cfg.class_sources, key=str):
            for record_id in cfg.class_sources[label]:
                jobs.append(("wfdb", record_id, label, None))
    else:
        if cfg.manifest is None:
            raise ConfigError("csvdir experiment needs a manifest")
        for path, label, rate in read_manifest(cfg.manifest):
            rate = rate or cfg.csv_rate_hz
            if not rate:
                raise ConfigError(f"{path}: no sampling rate in manifest or csv_rate_hz")
            jobs.append(("csv", path, label, rate))

    def run(job) -> ExtractionResult:
        kind, source, label, rate = job
        if kind == "wfdb":
            return _features_for_wfdb_record(cfg, source, label)
        return _features_for_csv_record(cfg, source, label, rate)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    vectors, labels = [], []
    skipped = 0
    record_counts: dict[str, int] = {}
    feature_names: list[str] | None = None
    for job, res in zip(jobs, results):
        if feature_names is None and res.vectors:
            feature_names = res.feature_names
        skipped += res.n_skipped
        record_counts[str(job[1])] = len(res.vectors)
        for vec in res.vectors:
            vectors.append(vec.values)
            labels.append(vec.label)
    if not vectors:
        raise EcgdxError("dataset assembly produced no beats")

    rate = cfg.resample_to_hz
    if rate is None:
        rate = cfg.csv_rate_hz if cfg.database == "csvdir" else 0
    if not rate:
        # native rate of the first record (wfdb headers carry it)
        data_dir = data_dir_from_env(cfg.data_dir)
        first = jobs[0][1]
        if cfg.database == "wfdb" and data_dir is not None:
            from ..dataio.wfdb import parse_header

            rate = parse_header(record_paths(data_dir, first)[0]).sampling_rate_hz
        else:
            rate = 0
    return AssembledDataset(np.vstack(vectors), labels, rate, feature_names or [], skipped, record_counts)


def make_trainer(cfg: ExperimentConfig):
    """(X, y) -> TrainedModel for the configured classifier."""
    if cfg.classifier == "svm":
        return lambda X, y: train_svm(X, y, cfg.svm, standardize=cfg.standardize)
    if cfg.classifier == "knn":
        return lambda X, y: train_knn(X, y, cfg.knn, standardize=cfg.standardize)
    if cfg.classifier == "mlp":
        return lambda X, y: train_mlp(X, y, cfg.mlp, standardize=cfg.standardize)
    return lambda X, y: train_naive_bayes(X, y, standardize=cfg.standardize)


def run_single_db(cfg: ExperimentConfig, dataset: AssembledDataset | None = None) -> ExperimentResult:
    """Ingest -> denoise -> R locations -> segment -> features -> 70/30
    split -> train -> predict -> metrics, all inside one database.
    """
    if dataset is None:
        dataset = assemble_dataset(cfg)
    parts = split(dataset.y, cfg.split_fraction, cfg.seed)
    X_train = dataset.X[parts.train_indices]
    y_train = [dataset.y[i] for i in parts.train_indices]
    X_test = dataset.X[parts.test_indices]
    y_test = [dataset.y[i] for i in parts.test_indices]
    model = make_trainer(cfg)(X_train, y_train)
    y_pred = predict(model, X_test)
    report, cm = compute_metrics(y_test, y_pred, model.classes)
    return ExperimentResult(report, cm, model, len(y_train), len(y_test))


def run_cross_db(
    train_cfg: ExperimentConfig,
    test_cfg: ExperimentConfig,
    train_dataset: AssembledDataset | None = None,
    test_dataset: AssembledDataset | None = None,
) -> ExperimentResult:
    """Train on one database (its train split), test on every beat of the
    other. Both sides must land at the same sampling rate; the feature
    pipeline is otherwise identical by construction.
    """
    if train_dataset is None:
        train_dataset = assemble_dataset(train_cfg)
    if test_dataset is None:
        test_dataset = assemble_dataset(test_cfg)
    if train_dataset.rate_hz and test_dataset.rate_hz and train_dataset.rate_hz != test_dataset.rate_hz:
        raise ConfigError(
            f"rate mismatch: training features at {train_dataset.rate_hz} Hz, test at "
            f"{test_dataset.rate_hz} Hz; set resample_to_hz"
        )
    parts = split(train_dataset.y, train_cfg.split_fraction, train_cfg.seed)
    X_train = train_dataset.X[parts.train_indices]
    y_train = [train_dataset.y[i] for i in parts.train_indices]
    model = make_trainer(train_cfg)(X_train, y_train)

    extra = set(test_dataset.y) - set(model.classes)
    if extra:
        raise ConfigError(f"test database has labels the model never saw: {sorted(extra, key=str)}")
    y_pred = predict(model, test_dataset.X)
    report, cm = compute_metrics(test_dataset.y, y_pred, model.classes)
    return ExperimentResult(report, cm, model, len(y_train), len(test_dataset.y))


def grid_search_svm(
    X,
    y,
    C_grid,
    gamma_grid,
    folds: int = 5,
    seed: int = 1,
    *,
    standardize: bool = True,
    tolerance: float = 1e-3,
    max_passes: int = 200,
) -> SvmConfig:
    """Cross-validated accuracy over the grid; ties go to smaller C, then
    smaller gamma (iteration order makes that the first strict improvement).
    """
    if len(C_grid) == 0 or len(gamma_grid) == 0:
        raise ConfigError("grids must be non-empty")
    if folds < 2:
        raise ConfigError("grid search needs >= 2 folds")
    X = np.asarray(X, dtype=np.float64)
    y_arr = np.asarray(y, dtype=object)
    fold_indices = stratified_folds(y_arr, folds, seed)
    best_cfg = None
    best_acc = -1.0
    for C in sorted(C_grid):
        for gamma in sorted(gamma_grid):
            cfg = SvmConfig(C=C, gamma=gamma, tolerance=tolerance, max_passes=max_passes)
            correct = 0
            for k in range(folds):
                test_idx = fold_indices[k]
                train_idx = np.concatenate([fold_indices[j] for j in range(folds) if j != k])
                model = train_svm(X[train_idx], list(y_arr[train_idx]), cfg, standardize=standardize)
                pred = predict(model, X[test_idx])
                correct += sum(p == t for p, t in zip(pred, y_arr[test_idx]))
            acc = correct / X.shape[0]
            if acc > best_acc:
                best_acc = acc
                best_cfg = cfg
    return best_cfg


# -- config files ------------------------------------------------------------

def parse_config_file(path: str | Path) -> dict[str, str]:
    """key = value lines; '#' starts a comment; later keys win."""
    out: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {line_no}: expected key = value, got {line!r}")
        key, value = stripped.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_bool(value: str, key: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _parse_leads(value: str) -> tuple:
    items = []
    for token in value.split(","):
        token = token.strip()
        if not token:
            continue
        items.append(int(token) if token.lstrip("+-").isdigit() else token)
    if not items:
        raise ConfigError("leads: empty selection")
    return tuple(items)


def build_experiment_config(
    entries: dict[str, str], base_dir: Path | None = None, overrides: dict | None = None
) -> ExperimentConfig:
    """Translate key=value entries (plus programmatic overrides) into an
    ExperimentConfig. Relative paths resolve against ``base_dir``.
    """
    entries = dict(entries)
    if overrides:
        entries.update({k: v for k, v in overrides.items() if v is not None})

    def resolve(p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() or base_dir is None else base_dir / path

    kwargs: dict = {}
    class_sources: dict[BeatClass, tuple[str, ...]] = {}
    svm_kw: dict = {}
    knn_kw: dict = {}
    mlp_kw: dict = {}
    ar_kw: dict = {}
    filter_kw: dict = {}
    try:
        for key, value in entries.items():
            if key.startswith("records."):
                label = BeatClass.parse(key.split(".", 1)[1])
                class_sources[label] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "database":
                kwargs["database"] = value
            elif key == "data_dir":
                kwargs["data_dir"] = resolve(value)
            elif key == "manifest":
                kwargs["manifest"] = resolve(value)
            elif key == "csv_header":
                kwargs["csv_header"] = _parse_bool(value, key)
            elif key == "csv_rate_hz":
                kwargs["csv_rate_hz"] = int(value)
            elif key == "leads":
                kwargs["leads"] = _parse_leads(value)
            elif key == "split_fraction":
                kwargs["split_fraction"] = float(value)
            elif key == "seed":
                kwargs["seed"] = int(value)
            elif key == "classifier":
                kwargs["classifier"] = value
            elif key == "standardize":
                kwargs["standardize"] = _parse_bool(value, key)
            elif key == "resample_to_hz":
                kwargs["resample_to_hz"] = int(value)
            elif key == "r_source":
                kwargs["r_source"] = value
            elif key == "match_tolerance_s":
                kwargs["match_tolerance_s"] = float(value)
            elif key == "threads":
                kwargs["threads"] = int(value)
            elif key == "svm_c":
                svm_kw["C"] = float(value)
            elif key == "svm_gamma":
                svm_kw["gamma"] = float(value)
            elif key == "svm_tolerance":
                svm_kw["tolerance"] = float(value)
            elif key == "svm_max_passes":
                svm_kw["max_passes"] = int(value)
            elif key == "knn_k":
                knn_kw["k"] = int(value)
            elif key == "knn_p":
                knn_kw["p"] = float(value)
            elif key == "mlp_hidden":
                mlp_kw["hidden_layers"] = tuple(int(v) for v in value.split(",") if v.strip())
            elif key == "mlp_lr":
                mlp_kw["learning_rate"] = float(value)
            elif key == "mlp_epochs":
                mlp_kw["epochs"] = int(value)
            elif key == "mlp_batch":
                mlp_kw["batch_size"] = int(value)
            elif key == "mlp_momentum":
                mlp_kw["momentum"] = float(value)
            elif key == "mlp_seed":
                mlp_kw["seed"] = int(value)
            elif key == "ar_order":
                ar_kw["order"] = int(value)
            elif key == "ar_method":
                ar_kw["method"] = ArMethod(value)
            elif key == "median_short_s":
                filter_kw["short_window_s"] = float(value)
            elif key == "median_long_s":
                filter_kw["long_window_s"] = float(value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None

    if class_sources:
        kwargs["class_sources"] = class_sources
    cfg = ExperimentConfig(**kwargs)
    if "seed" not in mlp_kw:
        mlp_kw["seed"] = cfg.seed
    cfg = replace(
        cfg,
        svm=SvmConfig(**svm_kw) if svm_kw else cfg.svm,
        knn=KnnConfig(**knn_kw) if knn_kw else cfg.knn,
        mlp=MlpConfig(**mlp_kw),
        ar=ArConfig(**ar_kw) if ar_kw else cfg.ar,
        filter_cfg=FilterConfig(**filter_kw) if filter_kw else cfg.filter_cfg,
    )
    return cfg


def load_experiment_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    return build_experiment_config(parse_config_file(path), path.parent, overrides)
