"""Seeded stratified train/test splitting."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class SplitResult:
    train_indices: np.ndarray
    test_indices: np.ndarray


def split(y, fraction: float, seed: int) -> SplitResult:
    """Shuffle within each class and apportion so the train side gets
    round(fraction * n) rows overall (largest-remainder rounding across
    classes). Every class with support >= 2 lands in both partitions;
    single-sample classes go to train with a warning.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"split fraction must be in (0, 1), got {fraction}")
    y = np.asarray(y, dtype=object)
    n = y.size
    rng = np.random.default_rng(seed)
    labels = sorted(set(y.tolist()), key=str)

    class_indices = {}
    for label in labels:
        idx = np.nonzero(y == label)[0]
        rng.shuffle(idx)
        class_indices[label] = idx

    target_train = int(round(fraction * n))
    quotas = {label: fraction * class_indices[label].size for label in labels}
    base = {label: int(np.floor(q)) for label, q in quotas.items()}
    remainder = target_train - sum(base.values())
    by_frac = sorted(labels, key=lambda c: (-(quotas[c] - base[c]), str(c)))
    for label in by_frac[:max(0, remainder)]:
        base[label] += 1

    train_parts, test_parts = [], []
    for label in labels:
        idx = class_indices[label]
        k = base[label]
        if idx.size == 1:
            warnings.warn(f"class {label!r} has a single sample; placed in train", stacklevel=2)
            k = 1
        elif idx.size >= 2:
            k = min(max(k, 1), idx.size - 1)  # both partitions see the class
        train_parts.append(idx[:k])
        test_parts.append(idx[k:])

    train = np.sort(np.concatenate(train_parts)).astype(np.int64)
    test = np.sort(np.concatenate(test_parts)).astype(np.int64)
    return SplitResult(train, test)


def stratified_folds(y, n_folds: int, seed: int) -> list[np.ndarray]:
    """Class-balanced fold index arrays for cross-validation."""
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    y = np.asarray(y, dtype=object)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for label in sorted(set(y.tolist()), key=str):
        idx = np.nonzero(y == label)[0]
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            folds[pos % n_folds].append(int(i))
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]
