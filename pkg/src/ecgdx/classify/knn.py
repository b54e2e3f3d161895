"""K-nearest-neighbors with a configurable Minkowski norm."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

_CHUNK = 256  # query rows per distance block, bounds memory at ~n_train*CHUNK floats


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5
    p: float = 2.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.p < 1:
            raise ValueError(f"norm order must be >= 1, got {self.p}")


def minkowski_distances(queries: np.ndarray, train: np.ndarray, p: float) -> np.ndarray:
    """L_p distance from every query row to every training row."""
    if p == 2.0:
        sq = (
            np.sum(queries * queries, axis=1)[:, None]
            + np.sum(train * train, axis=1)[None, :]
            - 2.0 * (queries @ train.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.sqrt(sq)
    diff = np.abs(queries[:, None, :] - train[None, :, :])
    if p == 1.0:
        return diff.sum(axis=2)
    return (diff**p).sum(axis=2) ** (1.0 / p)


@dataclass
class KnnModel:
    train_X: np.ndarray
    train_codes: np.ndarray
    n_classes: int
    k: int
    p: float

    @property
    def n_features(self) -> int:
        return self.train_X.shape[1]

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.int64)
        for start in range(0, X.shape[0], _CHUNK):
            block = X[start: start + _CHUNK]
            dist = minkowski_distances(block, self.train_X, self.p)
            order = np.argsort(dist, axis=1, kind="stable")
            for i in range(block.shape[0]):
                nearest = order[i, : self.k]
                votes = np.bincount(self.train_codes[nearest], minlength=self.n_classes)
                top = votes.max()
                tied = np.nonzero(votes == top)[0]
                if tied.size == 1:
                    out[start + i] = tied[0]
                else:
                    # tie: the closest neighbor belonging to a tied class decides
                    for j in nearest:
                        if self.train_codes[j] in tied:
                            out[start + i] = self.train_codes[j]
                            break
        return out


def fit_knn(X: np.ndarray, y_codes: np.ndarray, n_classes: int, cfg: KnnConfig) -> KnnModel:
    if cfg.k > X.shape[0]:
        raise ConfigError(f"k={cfg.k} exceeds the {X.shape[0]} training rows")
    return KnnModel(X.copy(), y_codes.copy(), n_classes, cfg.k, cfg.p)
