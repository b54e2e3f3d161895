"""Gaussian naive Bayes: independent per-feature class-conditional densities.

The posterior's class-independent denominator is omitted; prediction is
argmax of log prior plus summed log densities.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError

VARIANCE_FLOOR_RATIO = 1e-9  # floor relative to the mean per-feature variance


@dataclass
class NaiveBayesModel:
    log_priors: np.ndarray     # (k,)
    means: np.ndarray          # (k, d)
    variances: np.ndarray      # (k, d)

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        """log P(y) + sum_j log N(x_j; mu, sigma^2) per class, one row per query."""
        out = np.empty((X.shape[0], self.means.shape[0]))
        for c in range(self.means.shape[0]):
            var = self.variances[c]
            log_density = -0.5 * (np.log(2.0 * np.pi * var) + (X - self.means[c]) ** 2 / var)
            out[:, c] = self.log_priors[c] + log_density.sum(axis=1)
        return out

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.joint_log_likelihood(X), axis=1)


def fit_naive_bayes(X: np.ndarray, y_codes: np.ndarray, n_classes: int) -> NaiveBayesModel:
    if n_classes < 2:
        raise TrainingError("naive Bayes needs at least two classes")
    n, d = X.shape
    floor = VARIANCE_FLOOR_RATIO * float(np.mean(X.var(axis=0))) if n > 1 else VARIANCE_FLOOR_RATIO
    floor = max(floor, np.finfo(np.float64).tiny)
    log_priors = np.empty(n_classes)
    means = np.empty((n_classes, d))
    variances = np.empty((n_classes, d))
    for c in range(n_classes):
        rows = X[y_codes == c]
        if rows.shape[0] == 1:
            warnings.warn(f"class {c} has a single training sample; variance floored", stacklevel=2)
        log_priors[c] = np.log(rows.shape[0] / n)
        means[c] = rows.mean(axis=0)
        variances[c] = np.maximum(rows.var(axis=0), floor)
    return NaiveBayesModel(log_priors, means, variances)
