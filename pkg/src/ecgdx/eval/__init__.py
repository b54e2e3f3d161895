"""Metrics, splitting and the experiment protocols."""

from .experiments import (
    AssembledDataset,
    ExperimentConfig,
    ExperimentResult,
    assemble_dataset,
    build_experiment_config,
    grid_search_svm,
    load_experiment_config,
    parse_config_file,
    run_cross_db,
    run_single_db,
)
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    MetricsReport,
    compute_metrics,
    confusion_csv,
    confusion_matrix,
    format_actual_predicted,
    format_metrics_table,
    metrics_csv,
)
from .split import SplitResult, split, stratified_folds

__all__ = [
    "AssembledDataset",
    "ClassMetrics",
    "ConfusionMatrix",
    "ExperimentConfig",
    "ExperimentResult",
    "MetricsReport",
    "SplitResult",
    "assemble_dataset",
    "build_experiment_config",
    "compute_metrics",
    "confusion_csv",
    "confusion_matrix",
    "format_actual_predicted",
    "format_metrics_table",
    "grid_search_svm",
    "load_experiment_config",
    "metrics_csv",
    "parse_config_file",
    "run_cross_db",
    "run_single_db",
    "split",
    "stratified_folds",
]
