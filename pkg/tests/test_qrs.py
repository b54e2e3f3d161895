import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecgdx.dataio.types import BeatAnnotation, BeatClass, LeadSignal
from ecgdx.errors import SignalLengthError
from ecgdx.qrs import DetectionResult, DetectorConfig, detect_r_peaks, match_annotations


def pulse_train(rate=360, duration_s=60.0, period_s=1.0, first_s=0.5, sigma_s=0.012, amp=1.0):
    t = np.arange(int(duration_s * rate)) / rate
    centers = np.arange(first_s, duration_s - 0.01, period_s)
    x = np.zeros_like(t)
    for c in centers:
        x += amp * np.exp(-0.5 * ((t - c) / sigma_s) ** 2)
    return LeadSignal("synt", x), np.round(centers * rate).astype(np.int64)


class TestDetector:
    def test_sixty_pulses_detected_within_two_samples(self):
        sig, truth = pulse_train()
        assert truth.size == 60
        res = detect_r_peaks(sig, 360)
        assert res.r_peaks.size == 60
        assert np.abs(res.r_peaks - truth).max() <= 2

    @pytest.mark.parametrize("alpha", [0.5, 2.0, 10.0])
    def test_amplitude_scale_invariance(self, alpha):
        sig, _ = pulse_train()
        base = detect_r_peaks(sig, 360).r_peaks
        scaled = detect_r_peaks(LeadSignal("s", alpha * sig.samples), 360).r_peaks
        assert np.array_equal(base, scaled)

    def test_all_zero_signal(self):
        res = detect_r_peaks(LeadSignal("z", np.zeros(10 * 360)), 360)
        assert res.r_peaks.size == 0

    def test_too_short_signal(self):
        with pytest.raises(SignalLengthError):
            detect_r_peaks(LeadSignal("s", np.ones(360)), 360)

    def test_refractory_spacing_invariant(self, rng):
        # noisy, irregular beats; spacing must still respect the refractory
        rate = 360
        t = np.arange(30 * rate) / rate
        x = 0.05 * rng.standard_normal(t.size)
        c = 0.4
        while c < 29.5:
            x += np.exp(-0.5 * ((t - c) / 0.014) ** 2)
            c += rng.uniform(0.4, 1.2)
        cfg = DetectorConfig()
        peaks = detect_r_peaks(LeadSignal("n", x), rate, cfg).r_peaks
        gaps = np.diff(peaks)
        assert peaks.size > 10
        assert np.all(gaps >= int(round(cfg.refractory_s * rate)))
        assert np.all(gaps > 0)

    def test_searchback_recovers_small_beat(self):
        # one beat at 0.42 amplitude: its integrated energy (~18% of normal)
        # sits between the half and full thresholds, so only search-back
        # can recover it
        rate = 360
        t = np.arange(30 * rate) / rate
        x = np.zeros_like(t)
        centers = np.arange(0.5, 29.6, 1.0)
        for i, c in enumerate(centers):
            amp = 0.42 if i == 14 else 1.0
            x += amp * np.exp(-0.5 * ((t - c) / 0.012) ** 2)
        target = int(round(centers[14] * rate))
        found = detect_r_peaks(LeadSignal("sb", x), rate).r_peaks
        assert found.size == centers.size
        assert np.abs(found - target).min() <= 2
        without = detect_r_peaks(
            LeadSignal("sb", x), rate, DetectorConfig(searchback=False)
        ).r_peaks
        assert np.abs(without - target).min() > 2

    def test_trace_shapes(self):
        sig, _ = pulse_train(duration_s=10.0)
        res = detect_r_peaks(sig, 360, keep_trace=True)
        for arr in (res.trace.filtered, res.trace.derivative, res.trace.squared,
                    res.trace.integrated, res.trace.threshold):
            assert arr.shape == sig.samples.shape


def det(indices):
    return DetectionResult(np.asarray(indices, dtype=np.int64))


def anns(pairs):
    return [BeatAnnotation(i, label) for i, label in pairs]


class TestMatching:
    def test_within_tolerance(self):
        m = match_annotations(det([100]), anns([(102, BeatClass.NORMAL)]), 360, 54 / 360)
        assert m.pairs == [(100, BeatClass.NORMAL)]
        assert not m.unmatched_detections and not m.unmatched_annotations

    def test_outside_tolerance(self):
        m = match_annotations(det([100]), anns([(400, BeatClass.NORMAL)]), 360, 0.15)
        assert m.pairs == []
        assert m.unmatched_detections == [100]
        assert len(m.unmatched_annotations) == 1

    def test_two_detections_one_annotation_nearest_wins(self):
        m = match_annotations(det([95, 104]), anns([(100, BeatClass.PVC)]), 360, 0.15)
        # brute-force optimal assignment on the 2x1 case: nearer detection (104, d=4)
        assert m.pairs == [(104, BeatClass.PVC)]
        assert m.unmatched_detections == [95]

    def test_one_to_one_no_double_use(self):
        m = match_annotations(
            det([100, 103]), anns([(101, BeatClass.NORMAL), (102, BeatClass.PVC)]), 360, 0.15
        )
        used_d = [d for d, _ in m.pairs]
        assert len(set(used_d)) == len(used_d) == 2
        assert not m.unmatched_annotations

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.integers(0, 5000), max_size=30),
        st.lists(st.integers(0, 5000), max_size=30),
    )
    def test_one_to_one_property(self, d_idx, a_idx):
        annotations = anns([(i, BeatClass.NORMAL) for i in sorted(set(a_idx))])
        m = match_annotations(det(sorted(set(d_idx))), annotations, 360, 0.15)
        matched_d = [d for d, _ in m.pairs]
        assert len(matched_d) == len(set(matched_d))
        assert len(m.pairs) + len(m.unmatched_detections) == len(set(d_idx))
        assert len(m.pairs) + len(m.unmatched_annotations) == len(set(a_idx))

    def test_sensitivity_ppv_accessors(self):
        m = match_annotations(
            det([100, 500]), anns([(100, BeatClass.NORMAL), (900, BeatClass.NORMAL)]), 360, 0.1
        )
        assert m.sensitivity == pytest.approx(0.5)
        assert m.positive_predictivity == pytest.approx(0.5)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            match_annotations(det([1]), [], 360, 0.0)
