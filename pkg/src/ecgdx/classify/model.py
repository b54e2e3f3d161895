"""Common train/predict surface over the four classifiers, plus the
single-file model format (magic, version, kind, classes, standardization,
kind-specific blocks; numeric payloads little-endian float64).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

from ..errors import ModelIOError, ModelKindError, TrainingError
from .knn import KnnConfig, KnnModel, fit_knn
from .mlp import MlpConfig, MlpNetwork, fit_mlp
from .naive_bayes import NaiveBayesModel, fit_naive_bayes
from .standardize import StandardizationParams, fit_standardizer
from .svm import SvmConfig, SvmModel, SvmPair, fit_svm

MAGIC = b"ECGDXMDL"
FORMAT_VERSION = 1


class ModelKind(str, Enum):
    SVM = "svm"
    KNN = "knn"
    MLP = "mlp"
    NAIVE_BAYES = "nb"


@dataclass
class TrainedModel:
    kind: ModelKind
    classes: list
    standardizer: StandardizationParams | None
    impl: SvmModel | KnnModel | MlpNetwork | NaiveBayesModel

    @property
    def n_features(self) -> int:
        return self.impl.n_features


def _encode_labels(y: Sequence) -> tuple[list, np.ndarray]:
    classes = sorted(set(y), key=str)
    index = {c: i for i, c in enumerate(classes)}
    codes = np.array([index[v] for v in y], dtype=np.int64)
    return classes, codes


def _prepare(X, y, standardize: bool):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {X.shape}")
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} rows but {len(y)} labels")
    classes, codes = _encode_labels(y)
    if len(classes) < 2:
        raise TrainingError(f"training needs >= 2 classes, got {classes}")
    scaler = fit_standardizer(X) if standardize else None
    Xs = scaler.apply(X) if scaler is not None else X
    return Xs, codes, classes, scaler


def train_svm(X, y, cfg: SvmConfig = SvmConfig(), *, standardize: bool = True) -> TrainedModel:
    Xs, codes, classes, scaler = _prepare(X, y, standardize)
    return TrainedModel(ModelKind.SVM, classes, scaler, fit_svm(Xs, codes, len(classes), cfg))


def train_knn(X, y, cfg: KnnConfig = KnnConfig(), *, standardize: bool = True) -> TrainedModel:
    Xs, codes, classes, scaler = _prepare(X, y, standardize)
    return TrainedModel(ModelKind.KNN, classes, scaler, fit_knn(Xs, codes, len(classes), cfg))


def train_mlp(X, y, cfg: MlpConfig = MlpConfig(), *, standardize: bool = True) -> TrainedModel:
    Xs, codes, classes, scaler = _prepare(X, y, standardize)
    return TrainedModel(ModelKind.MLP, classes, scaler, fit_mlp(Xs, codes, len(classes), cfg))


def train_naive_bayes(X, y, *, standardize: bool = True) -> TrainedModel:
    Xs, codes, classes, scaler = _prepare(X, y, standardize)
    return TrainedModel(ModelKind.NAIVE_BAYES, classes, scaler, fit_naive_bayes(Xs, codes, len(classes)))


def predict(model: TrainedModel, X) -> list:
    """Standardize with the stored params, then the kind-specific rule."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"expected feature matrix with {model.n_features} columns, got shape {tuple(X.shape)}"
        )
    Xs = model.standardizer.apply(X) if model.standardizer is not None else X
    codes = model.impl.predict_codes(Xs)
    return [model.classes[int(c)] for c in codes]


# -- binary model file ------------------------------------------------------

def _w_u32(fh: BinaryIO, v: int) -> None:
    fh.write(struct.pack("<I", v))


def _w_f64(fh: BinaryIO, v: float) -> None:
    fh.write(struct.pack("<d", v))


def _w_str(fh: BinaryIO, s: str) -> None:
    raw = s.encode("utf-8")
    _w_u32(fh, len(raw))
    fh.write(raw)


def _w_arr(fh: BinaryIO, arr: np.ndarray) -> None:
    arr = np.asarray(arr, dtype=np.float64)
    _w_u32(fh, arr.ndim)
    for dim in arr.shape:
        _w_u32(fh, dim)
    fh.write(arr.astype("<f8").tobytes())


def _read(fh: BinaryIO, n: int) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise ModelIOError(f"truncated model file: wanted {n} bytes, got {len(raw)}")
    return raw


def _r_u32(fh: BinaryIO) -> int:
    return struct.unpack("<I", _read(fh, 4))[0]


def _r_f64(fh: BinaryIO) -> float:
    return struct.unpack("<d", _read(fh, 8))[0]


def _r_str(fh: BinaryIO) -> str:
    return _read(fh, _r_u32(fh)).decode("utf-8")


def _r_arr(fh: BinaryIO) -> np.ndarray:
    ndim = _r_u32(fh)
    if ndim > 4:
        raise ModelIOError(f"corrupt model file: array rank {ndim}")
    shape = tuple(_r_u32(fh) for _ in range(ndim))
    count = int(np.prod(shape)) if shape else 1
    data = np.frombuffer(_read(fh, count * 8), dtype="<f8")
    return data.reshape(shape).astype(np.float64)


def save_model(model: TrainedModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        _w_u32(fh, FORMAT_VERSION)
        _w_str(fh, model.kind.value)
        _w_u32(fh, len(model.classes))
        for c in model.classes:
            _w_str(fh, c.value if hasattr(c, "value") else str(c))
        if model.standardizer is None:
            _w_u32(fh, 0)
        else:
            _w_u32(fh, 1)
            _w_arr(fh, model.standardizer.mean)
            _w_arr(fh, model.standardizer.std)
        impl = model.impl
        if model.kind is ModelKind.SVM:
            _w_f64(fh, impl.gamma)
            _w_u32(fh, impl.n_classes)
            _w_u32(fh, len(impl.pairs))
            for pair in impl.pairs:
                _w_u32(fh, pair.pos_class)
                _w_u32(fh, pair.neg_class)
                _w_f64(fh, pair.bias)
                _w_arr(fh, pair.support_vectors)
                _w_arr(fh, pair.dual_coef)
        elif model.kind is ModelKind.KNN:
            _w_u32(fh, impl.n_classes)
            _w_u32(fh, impl.k)
            _w_f64(fh, impl.p)
            _w_arr(fh, impl.train_X)
            _w_arr(fh, impl.train_codes.astype(np.float64))
        elif model.kind is ModelKind.MLP:
            _w_u32(fh, len(impl.weights))
            for W, b in zip(impl.weights, impl.biases):
                _w_arr(fh, W)
                _w_arr(fh, b)
        else:
            _w_arr(fh, impl.log_priors)
            _w_arr(fh, impl.means)
            _w_arr(fh, impl.variances)


def load_model(path: str | Path, expected_kind: ModelKind | None = None) -> TrainedModel:
    with open(path, "rb") as fh:
        if _read(fh, len(MAGIC)) != MAGIC:
            raise ModelIOError(f"{path}: not a model file (bad magic)")
        version = _r_u32(fh)
        if version != FORMAT_VERSION:
            raise ModelIOError(f"{path}: unsupported model format version {version}")
        try:
            kind = ModelKind(_r_str(fh))
        except ValueError as exc:
            raise ModelIOError(f"{path}: {exc}") from None
        if expected_kind is not None and kind is not expected_kind:
            raise ModelKindError(f"{path}: contains a {kind.value} model, expected {expected_kind.value}")
        classes = [_r_str(fh) for _ in range(_r_u32(fh))]
        scaler = None
        if _r_u32(fh):
            mean = _r_arr(fh)
            std = _r_arr(fh)
            scaler = StandardizationParams(mean, std, np.nonzero(std == 0.0)[0])
        if kind is ModelKind.SVM:
            gamma = _r_f64(fh)
            n_classes = _r_u32(fh)
            pairs = []
            for _ in range(_r_u32(fh)):
                pos, neg = _r_u32(fh), _r_u32(fh)
                bias = _r_f64(fh)
                sv = _r_arr(fh)
                dual = _r_arr(fh)
                pairs.append(SvmPair(pos, neg, sv, dual, bias))
            impl = SvmModel(gamma, n_classes, pairs)
        elif kind is ModelKind.KNN:
            n_classes = _r_u32(fh)
            k = _r_u32(fh)
            p = _r_f64(fh)
            train_X = _r_arr(fh)
            codes = _r_arr(fh).astype(np.int64)
            impl = KnnModel(train_X, codes, n_classes, k, p)
        elif kind is ModelKind.MLP:
            weights, biases = [], []
            for _ in range(_r_u32(fh)):
                weights.append(_r_arr(fh))
                biases.append(_r_arr(fh))
            impl = MlpNetwork(weights, biases)
        else:
            impl = NaiveBayesModel(_r_arr(fh), _r_arr(fh), _r_arr(fh))
    return TrainedModel(kind, classes, scaler, impl)
