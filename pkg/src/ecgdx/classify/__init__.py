"""Four natively implemented classifiers behind one train/predict surface."""

from .knn import KnnConfig, KnnModel, fit_knn, minkowski_distances
from .mlp import MlpConfig, MlpNetwork, fit_mlp, relu, softmax
from .model import (
    ModelKind,
    TrainedModel,
    load_model,
    predict,
    save_model,
    train_knn,
    train_mlp,
    train_naive_bayes,
    train_svm,
)
from .naive_bayes import NaiveBayesModel, fit_naive_bayes
from .standardize import StandardizationParams, fit_standardizer
from .svm import SvmConfig, SvmModel, fit_svm, rbf_kernel

__all__ = [
    "KnnConfig",
    "KnnModel",
    "MlpConfig",
    "MlpNetwork",
    "ModelKind",
    "NaiveBayesModel",
    "StandardizationParams",
    "SvmConfig",
    "SvmModel",
    "TrainedModel",
    "fit_knn",
    "fit_mlp",
    "fit_naive_bayes",
    "fit_standardizer",
    "fit_svm",
    "load_model",
    "minkowski_distances",
    "predict",
    "rbf_kernel",
    "relu",
    "save_model",
    "softmax",
    "train_knn",
    "train_mlp",
    "train_naive_bayes",
    "train_svm",
]
