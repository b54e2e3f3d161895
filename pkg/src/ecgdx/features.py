"""Heartbeat segmentation and the 8-per-lead feature vector.

Each beat is 300 samples (122 before the R peak, the peak, 177 after).
Per lead, the features are the four AR coefficients of the mean-removed
segment followed by mean, variance, standard deviation and skewness, in
that order; multi-lead vectors concatenate the per-lead blocks in lead
order.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.linalg import solve_toeplitz

from .dataio.types import BeatClass, EcgRecord, LeadSignal
from .errors import DegenerateSegmentError, ParseError

BEAT_PRE = 122
BEAT_POST = 177
BEAT_LENGTH = BEAT_PRE + 1 + BEAT_POST  # 300

FEATURE_NAMES_PER_LEAD = ("a1", "a2", "a3", "a4", "mean", "variance", "std", "skewness")


class ArMethod(str, Enum):
    BURG = "burg"
    YULE_WALKER = "yule-walker"


@dataclass(frozen=True)
class ArConfig:
    order: int = 4
    method: ArMethod = ArMethod.BURG

    def __post_init__(self):
        if not 1 <= self.order < BEAT_LENGTH:
            raise ValueError(f"AR order must be in [1, {BEAT_LENGTH}), got {self.order}")


@dataclass
class Heartbeat:
    lead_name: str
    samples: np.ndarray
    r_index_in_record: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.size != BEAT_LENGTH:
            raise ValueError(f"heartbeat must have {BEAT_LENGTH} samples, got {self.samples.size}")


@dataclass
class BeatStats:
    mean: float
    variance: float
    std: float
    skewness: float
    degenerate: bool = False


@dataclass
class FeatureVector:
    values: np.ndarray
    label: BeatClass | None = None


@dataclass
class ExtractionResult:
    vectors: list[FeatureVector]
    r_indices: list[int]
    n_skipped: int
    feature_names: list[str]

    def matrix(self) -> np.ndarray:
        if not self.vectors:
            return np.empty((0, len(self.feature_names)))
        return np.vstack([v.values for v in self.vectors])


def segment_beat(signal_in: LeadSignal, r_index: int) -> Heartbeat | None:
    """Samples [r-122, r+177] inclusive, or None when the window overruns."""
    if r_index - BEAT_PRE < 0 or r_index + BEAT_POST >= len(signal_in):
        return None
    window = signal_in.samples[r_index - BEAT_PRE: r_index + BEAT_POST + 1]
    return Heartbeat(signal_in.lead_name, window.copy(), r_index)


def burg_ar(x: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Burg recursion on a zero-mean series.

    Returns (a, k): coefficients of x_n = sum_i a_i x_{n-i} + e_n and the
    reflection coefficients, which satisfy |k| <= 1 by construction.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if order >= n:
        raise ValueError(f"order {order} needs more than {order} samples, got {n}")
    poly = np.zeros(order + 1)
    poly[0] = 1.0
    refl = np.zeros(order)
    f = x.copy()
    b = x.copy()
    denom = 2.0 * np.dot(x, x) - x[0] ** 2 - x[-1] ** 2
    for k in range(order):
        fk = f[k + 1:]
        bk = b[: n - k - 1]
        mu = 0.0 if denom <= 0.0 else -2.0 * np.dot(fk, bk) / denom
        refl[k] = mu
        head = poly[: k + 2].copy()
        poly[: k + 2] += mu * head[::-1]
        f_new = fk + mu * bk
        b_new = bk + mu * fk
        f[k + 1:] = f_new
        b[: n - k - 1] = b_new
        denom = (1.0 - mu * mu) * denom - f[k + 1] ** 2 - b[n - k - 2] ** 2
    return -poly[1:], refl


def yule_walker_ar(x: np.ndarray, order: int) -> np.ndarray:
    """Solve the Toeplitz normal equations on the biased autocorrelation."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    r = np.array([np.dot(x[: n - k], x[k:]) / n for k in range(order + 1)])
    if r[0] <= 0.0:
        raise DegenerateSegmentError("zero-variance segment has no AR representation")
    return solve_toeplitz(r[:order], r[1: order + 1])


def ar_coefficients(beat: Heartbeat, cfg: ArConfig = ArConfig()) -> np.ndarray:
    """AR coefficients of the mean-removed beat, Burg recursion by default."""
    x = beat.samples - beat.samples.mean()
    if not np.any(x):
        raise DegenerateSegmentError(
            f"beat at {beat.r_index_in_record} on {beat.lead_name!r} is constant"
        )
    if cfg.method is ArMethod.BURG:
        a, _ = burg_ar(x, cfg.order)
        return a
    return yule_walker_ar(x, cfg.order)


def beat_statistics(beat: Heartbeat) -> BeatStats:
    """Population (1/N) mean, variance, std and skewness of the segment."""
    x = beat.samples
    mean = float(x.mean())
    variance = float(np.mean((x - mean) ** 2))
    std = float(np.sqrt(variance))
    if std == 0.0 or np.ptp(x) == 0.0:
        return BeatStats(mean, 0.0, 0.0, 0.0, degenerate=True)
    skewness = float(np.mean(((x - mean) / std) ** 3))
    return BeatStats(mean, variance, std, skewness)


def _beat_features(beat: Heartbeat, cfg: ArConfig) -> np.ndarray:
    a = ar_coefficients(beat, cfg)
    s = beat_statistics(beat)
    return np.concatenate([a, [s.mean, s.variance, s.std, s.skewness]])


def feature_names(lead_names: list[str], order: int = 4) -> list[str]:
    per_lead = [f"a{i}" for i in range(1, order + 1)] + list(FEATURE_NAMES_PER_LEAD[4:])
    return [f"{lead}_{name}" for lead in lead_names for name in per_lead]


def extract_features(
    record: EcgRecord,
    r_indices: list[int],
    leads: list[str],
    cfg: ArConfig = ArConfig(),
    labels: list[BeatClass] | None = None,
) -> ExtractionResult:
    """Per-lead 8-vectors concatenated in lead order, one row per usable beat.

    Beats whose window overruns the record or that degenerate to a constant
    segment are skipped and counted, never aborting the batch.
    """
    lead_signals = [record.lead(name) for name in leads]
    if labels is not None and len(labels) != len(r_indices):
        raise ValueError(f"{len(labels)} labels for {len(r_indices)} R indices")

    vectors: list[FeatureVector] = []
    kept: list[int] = []
    skipped = 0
    for pos, r in enumerate(r_indices):
        parts = []
        for sig in lead_signals:
            beat = segment_beat(sig, int(r))
            if beat is None:
                parts = None
                break
            try:
                parts.append(_beat_features(beat, cfg))
            except DegenerateSegmentError:
                parts = None
                break
        if parts is None:
            skipped += 1
            continue
        label = labels[pos] if labels is not None else None
        vectors.append(FeatureVector(np.concatenate(parts), label))
        kept.append(int(r))

    return ExtractionResult(vectors, kept, skipped, feature_names(leads, cfg.order))


def save_features_csv(path: str | Path, result: ExtractionResult) -> None:
    """Write the interchange CSV: header row, one beat per row, label last."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r_index", *result.feature_names, "label"])
        for r, vec in zip(result.r_indices, result.vectors):
            label = vec.label.value if vec.label is not None else ""
            writer.writerow([r, *[repr(float(v)) for v in vec.values], label])


def load_features_csv(path: str | Path) -> tuple[np.ndarray, list[BeatClass | None], list[str]]:
    """Read the interchange CSV back into (matrix, labels, feature names)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty features file") from None
        if len(head) < 3 or head[0] != "r_index" or head[-1] != "label":
            raise ParseError(f"{path}: not a features CSV (bad header)")
        names = head[1:-1]
        rows, labels = [], []
        for i, row in enumerate(reader):
            if len(row) != len(head):
                raise ParseError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(head)}")
            try:
                rows.append([float(v) for v in row[1:-1]])
            except ValueError:
                raise ParseError(f"{path}: row {i + 2}: non-numeric feature value") from None
            labels.append(BeatClass.parse(row[-1]) if row[-1] else None)
    X = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(names)))
    return X, labels, names
