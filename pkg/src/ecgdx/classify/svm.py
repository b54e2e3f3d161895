"""Soft-margin RBF SVM trained by sequential minimal optimization.

Multiclass is one-vs-one: one binary machine per class pair, combined by
majority vote with ties broken by the summed decision values.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingError


@dataclass(frozen=True)
class SvmConfig:
    C: float = 65536.0
    gamma: float = 2.44e-4
    tolerance: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        if self.C <= 0 or self.gamma <= 0:
            raise ValueError(f"C and gamma must be positive, got C={self.C}, gamma={self.gamma}")


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for every row pair."""
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


class _Smo:
    """SMO on a precomputed kernel matrix.

    Working pairs are chosen by maximal KKT violation: the most violating
    index that can still move up paired against the most violating one that
    can move down. The bias stays out of the iteration (errors exclude it)
    and is recovered from the KKT conditions after convergence.
    """

    def __init__(self, K: np.ndarray, y: np.ndarray, C: float, tol: float, max_passes: int):
        self.K = K
        self.y = y.astype(np.float64)
        self.C = C
        self.tol = tol
        self.max_iter = max(1, max_passes) * y.size
        self.n = y.size
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.errors = -self.y.copy()  # v(x) - y with v = biasless decision value

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1, e2 = self.errors[i1], self.errors[i2]
        s = y1 * y2
        if s > 0:
            lo, hi = max(0.0, a1 + a2 - self.C), min(self.C, a1 + a2)
        else:
            lo, hi = max(0.0, a2 - a1), min(self.C, self.C + a2 - a1)
        if lo >= hi:
            return False
        k11, k12, k22 = self.K[i1, i1], self.K[i1, i2], self.K[i2, i2]
        # eta > 0 for distinct points under an RBF kernel; the floor makes
        # coincident points jump straight to the gradient-favored bound
        eta = max(k11 + k22 - 2.0 * k12, 1e-12)
        a2_new = a2 + y2 * (e1 - e2) / eta
        a2_new = min(hi, max(lo, a2_new))
        if abs(a2_new - a2) < 1e-14 * (a2_new + a2 + 1e-14):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        # snap to the exact bounds so dust-sized room never pins a point
        snap = 1e-12 * self.C
        if a1_new < snap:
            a1_new = 0.0
        elif a1_new > self.C - snap:
            a1_new = self.C
        d1 = a1_new - a1
        d2 = a2_new - a2
        self.alpha[i1] = a1_new
        self.alpha[i2] = a2_new
        self.errors += y1 * d1 * self.K[i1] + y2 * d2 * self.K[i2]
        return True

    def _selection(self) -> tuple[int, int, float]:
        """Maximal violating pair and the KKT gap between its two sides."""
        up = ((self.y > 0) & (self.alpha < self.C)) | ((self.y < 0) & (self.alpha > 0.0))
        down = ((self.y > 0) & (self.alpha > 0.0)) | ((self.y < 0) & (self.alpha < self.C))
        if not up.any() or not down.any():
            return -1, -1, 0.0
        up_idx = np.nonzero(up)[0]
        down_idx = np.nonzero(down)[0]
        i = int(up_idx[np.argmin(self.errors[up_idx])])
        j = int(down_idx[np.argmax(self.errors[down_idx])])
        return i, j, float(self.errors[j] - self.errors[i])

    def solve(self) -> None:
        i = j = -1
        for _ in range(self.max_iter):
            i, j, gap = self._selection()
            if i < 0 or gap < self.tol:
                break
            if not self._take_step(i, j):
                # degenerate pair: retry against the runner-up on the down side
                down = ((self.y > 0) & (self.alpha > 0.0)) | ((self.y < 0) & (self.alpha < self.C))
                down[j] = False
                down_idx = np.nonzero(down)[0]
                if down_idx.size == 0:
                    break
                j2 = int(down_idx[np.argmax(self.errors[down_idx])])
                if not self._take_step(i, j2):
                    break

        # bias from the KKT conditions: free vectors pin it exactly,
        # otherwise the midpoint of the remaining violation interval.
        free = (self.alpha > 0.0) & (self.alpha < self.C)
        if free.any():
            self.b = float(-np.mean(self.errors[free]))
        elif i >= 0 and j >= 0:
            self.b = float(-0.5 * (self.errors[i] + self.errors[j]))
        else:
            self.b = 0.0


@dataclass
class SvmPair:
    """One binary machine: positive class first, negative class second."""

    pos_class: int
    neg_class: int
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_j * y_j for each support vector
    bias: float


@dataclass
class SvmModel:
    gamma: float
    n_classes: int
    pairs: list[SvmPair]

    @property
    def n_features(self) -> int:
        return self.pairs[0].support_vectors.shape[1]

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        """Matrix of pair decision functions, one column per class pair."""
        out = np.empty((X.shape[0], len(self.pairs)))
        for j, pair in enumerate(self.pairs):
            K = rbf_kernel(X, pair.support_vectors, self.gamma)
            out[:, j] = K @ pair.dual_coef + pair.bias
        return out

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        dec = self.decision_values(X)
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        strength = np.zeros((X.shape[0], self.n_classes))
        for j, pair in enumerate(self.pairs):
            pos_wins = dec[:, j] > 0.0
            votes[pos_wins, pair.pos_class] += 1
            votes[~pos_wins, pair.neg_class] += 1
            strength[:, pair.pos_class] += dec[:, j]
            strength[:, pair.neg_class] -= dec[:, j]
        best = np.empty(X.shape[0], dtype=np.int64)
        top = votes.max(axis=1)
        for i in range(X.shape[0]):
            tied = np.nonzero(votes[i] == top[i])[0]
            best[i] = tied[np.argmax(strength[i, tied])] if tied.size > 1 else tied[0]
        return best


def fit_svm(X: np.ndarray, y_codes: np.ndarray, n_classes: int, cfg: SvmConfig) -> SvmModel:
    """Train all one-vs-one pairs. ``y_codes`` are 0..n_classes-1."""
    if n_classes < 2:
        raise TrainingError("SVM needs at least two classes")
    pairs: list[SvmPair] = []
    for a in range(n_classes):
        for b in range(a + 1, n_classes):
            mask = (y_codes == a) | (y_codes == b)
            Xp = X[mask]
            yp = np.where(y_codes[mask] == a, 1.0, -1.0)
            K = rbf_kernel(Xp, Xp, cfg.gamma)
            smo = _Smo(K, yp, cfg.C, cfg.tolerance, cfg.max_passes)
            smo.solve()
            sv = smo.alpha > 1e-12
            pairs.append(
                SvmPair(
                    pos_class=a,
                    neg_class=b,
                    support_vectors=Xp[sv].copy(),
                    dual_coef=(smo.alpha * yp)[sv].copy(),
                    bias=smo.b,
                )
            )
    return SvmModel(cfg.gamma, n_classes, pairs)
