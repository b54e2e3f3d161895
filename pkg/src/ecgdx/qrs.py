"""Pan-Tompkins R-peak detection and detection/annotation alignment.

Stage cascade: bandpass -> five-point derivative -> squaring -> moving-window
integration -> dual adaptive thresholds with search-back. Thresholds track
running signal/noise peak estimates on both the integrated and the filtered
signal, so detection is invariant to amplitude scaling.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .dataio.types import BeatAnnotation, BeatClass, LeadSignal
from .errors import SignalLengthError


@dataclass(frozen=True)
class DetectorConfig:
    bandpass_low_hz: float = 5.0
    bandpass_high_hz: float = 15.0
    integration_window_s: float = 0.150
    refractory_s: float = 0.200
    searchback: bool = True
    refine_window_s: float = 0.040
    t_wave_window_s: float = 0.360

    def __post_init__(self):
        if not 0 < self.bandpass_low_hz < self.bandpass_high_hz:
            raise ValueError("need 0 < bandpass low < bandpass high")
        if self.refractory_s <= 0:
            raise ValueError("refractory must be positive")


@dataclass
class StageTrace:
    """Per-sample stage outputs for diagnostic CSV dumps."""

    filtered: np.ndarray
    derivative: np.ndarray
    squared: np.ndarray
    integrated: np.ndarray
    threshold: np.ndarray


@dataclass
class DetectionResult:
    r_peaks: np.ndarray
    trace: StageTrace | None = None


@dataclass
class MatchResult:
    """One-to-one alignment between detections and expert annotations."""

    pairs: list[tuple[int, BeatClass]]
    unmatched_detections: list[int]
    unmatched_annotations: list[BeatAnnotation]

    @property
    def sensitivity(self) -> float:
        denom = len(self.pairs) + len(self.unmatched_annotations)
        return len(self.pairs) / denom if denom else 0.0

    @property
    def positive_predictivity(self) -> float:
        denom = len(self.pairs) + len(self.unmatched_detections)
        return len(self.pairs) / denom if denom else 0.0


def _stage_outputs(x: np.ndarray, rate_hz: int, cfg: DetectorConfig):
    """Bandpass, derivative, squared and integrated stages (all causal)."""
    high = min(cfg.bandpass_high_hz, 0.99 * rate_hz / 2)
    b, a = sps.butter(2, [cfg.bandpass_low_hz, high], btype="band", fs=rate_hz)
    filtered = sps.lfilter(b, a, x)
    # five-point derivative, shifted causal: y[n] = (2x[n]+x[n-1]-x[n-3]-2x[n-4])/8T
    kernel = np.array([2.0, 1.0, 0.0, -1.0, -2.0]) * (rate_hz / 8.0)
    derivative = np.convolve(filtered, kernel)[: x.size]
    squared = derivative**2
    w = max(1, int(round(cfg.integration_window_s * rate_hz)))
    integrated = np.convolve(squared, np.full(w, 1.0 / w))[: x.size]
    return filtered, derivative, squared, integrated, w


def _local_maxima(x: np.ndarray) -> np.ndarray:
    """Indices i with x[i-1] < x[i] >= x[i+1] (first point of any plateau)."""
    if x.size < 3:
        return np.empty(0, dtype=np.int64)
    rising = x[1:-1] > x[:-2]
    falling = x[1:-1] >= x[2:]
    return np.nonzero(rising & falling)[0] + 1


def detect_r_peaks(
    signal_in: LeadSignal,
    rate_hz: int,
    cfg: DetectorConfig = DetectorConfig(),
    *,
    keep_trace: bool = False,
) -> DetectionResult:
    """Run the full detector on a denoised lead.

    Every detection is refined to the sample of maximum absolute amplitude
    of the input within +-refine_window_s, so segment centers land on the
    R apex regardless of filter group delay.
    """
    x = np.asarray(signal_in.samples, dtype=np.float64)
    if x.size < 2 * rate_hz:
        raise SignalLengthError(f"detector needs >= 2 s of signal, got {x.size / rate_hz:.3f} s")

    filtered, derivative, squared, integrated, w_int = _stage_outputs(x, rate_hz, cfg)
    abs_filt = np.abs(filtered)
    abs_deriv = np.abs(derivative)

    refractory = int(round(cfg.refractory_s * rate_hz))
    refine_w = int(round(cfg.refine_window_s * rate_hz))
    t_wave_w = int(round(cfg.t_wave_window_s * rate_hz))
    lookback = w_int + refine_w

    peaks = _local_maxima(integrated)

    # Learning phase: first two seconds seed the running estimates.
    learn = 2 * rate_hz
    spki = 0.25 * float(np.max(integrated[:learn]))
    npki = 0.5 * float(np.mean(integrated[:learn]))
    spkf = 0.25 * float(np.max(abs_filt[:learn]))
    npkf = 0.5 * float(np.mean(abs_filt[:learn]))

    def th_i():
        return npki + 0.25 * (spki - npki)

    def th_f():
        return npkf + 0.25 * (spkf - npkf)

    def peak_f(p: int) -> float:
        return float(np.max(abs_filt[max(0, p - w_int): p + 1]))

    def peak_slope(p: int) -> float:
        return float(np.max(abs_deriv[max(0, p - w_int): p + 1]))

    def fiducial(p: int) -> int:
        lo = max(0, p - lookback)
        return lo + int(np.argmax(np.abs(x[lo: p + 1])))

    qrs_mwi: list[int] = []       # MWI peak index of each accepted QRS
    detections: list[int] = []    # fiducial sample of each accepted QRS
    qrs_slopes: list[float] = []
    rr_intervals: list[float] = []
    rr_ok: list[float] = []       # RRs within the 92-116% band of the running average

    threshold_trace = np.zeros_like(integrated) if keep_trace else None
    trace_pos = 0

    def rr_average() -> tuple[float, float]:
        avg1 = float(np.mean(rr_intervals[-8:])) if rr_intervals else 0.0
        avg2 = float(np.mean(rr_ok[-8:])) if rr_ok else avg1
        return avg1, avg2

    def accept(p: int, peaki: float, peakf: float, slope: float, searchback: bool):
        nonlocal spki, spkf
        factor = 0.25 if searchback else 0.125
        spki = factor * peaki + (1 - factor) * spki
        spkf = factor * peakf + (1 - factor) * spkf
        if qrs_mwi:
            rr = float(p - qrs_mwi[-1])
            rr_intervals.append(rr)
            _, avg2 = rr_average()
            if avg2 == 0.0 or 0.92 * avg2 <= rr <= 1.16 * avg2:
                rr_ok.append(rr)
        qrs_mwi.append(p)
        detections.append(fiducial(p))
        qrs_slopes.append(slope)

    for p in peaks:
        if threshold_trace is not None:
            threshold_trace[trace_pos: p + 1] = th_i()
            trace_pos = p + 1

        # Search-back first: if the expected beat never arrived before this
        # candidate, rescan the gap at half threshold.
        if cfg.searchback and len(qrs_mwi) >= 2:
            _, avg2 = rr_average()
            if avg2 > 0 and p - qrs_mwi[-1] > 1.66 * avg2:
                lo, hi = qrs_mwi[-1] + refractory, p
                in_gap = peaks[(peaks > lo) & (peaks < hi)]
                if in_gap.size:
                    best = int(in_gap[np.argmax(integrated[in_gap])])
                    peaki_b = float(integrated[best])
                    pf_b = peak_f(best)
                    if peaki_b > 0.5 * th_i() and pf_b > 0.5 * th_f():
                        accept(best, peaki_b, pf_b, peak_slope(best), searchback=True)

        peaki = float(integrated[p])
        if qrs_mwi and p - qrs_mwi[-1] < refractory:
            continue
        ti, tf = th_i(), th_f()
        slope = peak_slope(p)
        is_qrs = False
        if peaki > ti:
            pf = peak_f(p)
            t_wave = (
                qrs_mwi
                and p - qrs_mwi[-1] < t_wave_w
                and slope < 0.5 * qrs_slopes[-1]
            )
            if not t_wave and pf > tf:
                accept(p, peaki, pf, slope, searchback=False)
                is_qrs = True
        if not is_qrs:
            npki = 0.125 * peaki + 0.875 * npki
            npkf = 0.125 * peak_f(p) + 0.875 * npkf

    if threshold_trace is not None:
        threshold_trace[trace_pos:] = th_i()

    # Refine on the input signal and enforce the refractory spacing; when
    # refinement collapses two detections, the larger-amplitude one wins.
    refined: list[int] = []
    for d in detections:
        lo = max(0, d - refine_w)
        hi = min(x.size, d + refine_w + 1)
        r = lo + int(np.argmax(np.abs(x[lo:hi])))
        if refined and r - refined[-1] < refractory:
            if abs(x[r]) > abs(x[refined[-1]]):
                refined[-1] = r
        else:
            refined.append(r)

    trace = None
    if keep_trace:
        trace = StageTrace(filtered, derivative, squared, integrated, threshold_trace)
    return DetectionResult(np.asarray(refined, dtype=np.int64), trace)


def match_annotations(
    detections: DetectionResult,
    annotations: list[BeatAnnotation],
    rate_hz: int,
    tolerance_s: float = 0.150,
) -> MatchResult:
    """Greedy one-to-one nearest matching within tolerance.

    Candidate (detection, annotation) pairs are taken closest-first; each
    side is used at most once. Remaining items are reported unmatched.
    """
    if tolerance_s <= 0:
        raise ValueError("tolerance must be positive")
    tol = tolerance_s * rate_hz
    det = np.asarray(detections.r_peaks, dtype=np.int64)
    ann_idx = np.array([a.sample_index for a in annotations], dtype=np.int64)

    candidates: list[tuple[float, int, int]] = []
    for i, d in enumerate(det):
        j0 = int(np.searchsorted(ann_idx, d))
        for j in (j0 - 1, j0, j0 + 1):
            if 0 <= j < ann_idx.size:
                dist = abs(float(d - ann_idx[j]))
                if dist <= tol:
                    candidates.append((dist, i, j))
    candidates.sort()

    used_det: set[int] = set()
    used_ann: set[int] = set()
    matched: list[tuple[int, int]] = []
    for _, i, j in candidates:
        if i in used_det or j in used_ann:
            continue
        used_det.add(i)
        used_ann.add(j)
        matched.append((i, j))
    matched.sort()

    pairs = [(int(det[i]), annotations[j].label) for i, j in matched]
    unmatched_det = [int(det[i]) for i in range(det.size) if i not in used_det]
    unmatched_ann = [annotations[j] for j in range(len(annotations)) if j not in used_ann]
    return MatchResult(pairs, unmatched_det, unmatched_ann)
