"""Per-feature standardization fitted on training data only."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError


@dataclass
class StandardizationParams:
    mean: np.ndarray
    std: np.ndarray
    # columns with zero training variance pass through unscaled
    constant_columns: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def scale(self) -> np.ndarray:
        s = self.std.copy()
        s[s == 0.0] = 1.0
        return s

    def apply(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale


def fit_standardizer(X: np.ndarray) -> StandardizationParams:
    """Population mean/std per column; zero-variance columns are flagged."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise TrainingError(f"standardizer needs at least 2 rows, got shape {X.shape}")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    constant = np.nonzero(std == 0.0)[0]
    return StandardizationParams(mean, std, constant)
