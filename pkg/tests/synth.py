"""Synthetic ECG material: parametrized beat morphologies, rendered
multi-lead records, and on-disk CSV / WFDB databases for pipeline tests.
No real patient data is involved; class labels name waveform families.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from wfdb_fixtures import write_atr, write_wfdb_record


@dataclass(frozen=True)
class BeatShape:
    r_amp: float = 1.2
    r_sigma: float = 0.013
    s_amp: float = 0.35
    p_amp: float = 0.12
    t_amp: float = 0.28
    t_delay: float = 0.26
    rr_s: float = 0.8
    rr_jitter: float = 0.03


def _bump(t: np.ndarray, center: float, sigma: float) -> np.ndarray:
    return np.exp(-0.5 * ((t - center) / sigma) ** 2)


def beat_component(t_rel: np.ndarray, shape: BeatShape) -> np.ndarray:
    wave = shape.r_amp * _bump(t_rel, 0.0, shape.r_sigma)
    wave -= shape.s_amp * _bump(t_rel, 0.04, 0.014)
    wave += shape.p_amp * _bump(t_rel, -0.17, 0.025)
    wave += shape.t_amp * _bump(t_rel, shape.t_delay, 0.055)
    return wave


# Distinguishable waveform families; the labels reuse the rhythm/beat class
# names so the full label plumbing gets exercised.
SHAPES: dict[str, BeatShape] = {
    "SR": BeatShape(),
    "SB": BeatShape(r_amp=1.0, r_sigma=0.024, s_amp=0.15, t_amp=0.42, rr_s=1.3),
    "ST": BeatShape(r_amp=0.8, r_sigma=0.010, p_amp=0.22, t_amp=0.12, rr_s=0.48),
    "AFIB": BeatShape(r_amp=1.05, r_sigma=0.017, p_amp=0.0, s_amp=0.55, t_delay=0.21, rr_jitter=0.22),
    "Normal": BeatShape(),
    "LBBB": BeatShape(r_amp=0.9, r_sigma=0.030, s_amp=0.1, t_amp=-0.3, rr_s=0.9),
    "RBBB": BeatShape(r_amp=1.1, r_sigma=0.011, s_amp=0.7, t_amp=0.35, rr_s=0.75),
    "APB": BeatShape(r_amp=0.75, r_sigma=0.014, p_amp=0.3, t_amp=0.18, rr_s=0.62, rr_jitter=0.12),
    "PACE": BeatShape(r_amp=1.5, r_sigma=0.008, s_amp=0.9, p_amp=0.0, t_amp=0.5, rr_s=0.85),
    "PVC": BeatShape(r_amp=1.4, r_sigma=0.035, s_amp=0.2, p_amp=0.0, t_amp=-0.45, rr_s=0.95),
    "FVNB": BeatShape(r_amp=1.15, r_sigma=0.022, s_amp=0.45, t_amp=0.1, rr_s=0.88),
    "FPNB": BeatShape(r_amp=1.3, r_sigma=0.018, s_amp=0.05, p_amp=0.05, t_amp=0.6, rr_s=0.8),
}


def render_record(
    shape: BeatShape,
    duration_s: float,
    rate_hz: int,
    rng: np.random.Generator,
    *,
    noise: float = 0.02,
    wander_amp: float = 0.15,
    person_scale: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Two-lead record plus the true R-peak sample indices."""
    n = int(duration_s * rate_hz)
    t = np.arange(n) / rate_hz
    centers = []
    c = 0.5
    while c < duration_s - 0.6:
        centers.append(c)
        c += shape.rr_s * (1.0 + shape.rr_jitter * rng.uniform(-1, 1))
    lead_a = np.zeros(n)
    lead_b = np.zeros(n)
    b_shape = replace(
        shape,
        r_amp=0.6 * shape.r_amp,
        s_amp=1.4 * shape.s_amp,
        t_amp=-0.7 * shape.t_amp,
        p_amp=0.5 * shape.p_amp,
    )
    for c in centers:
        window = np.abs(t - c) < 0.45
        lead_a[window] += beat_component(t[window] - c, shape)
        lead_b[window] += beat_component(t[window] - c, b_shape)
    phase = rng.uniform(0, 2 * np.pi)
    wander = wander_amp * np.sin(2 * np.pi * 0.25 * t + phase)
    lead_a = person_scale * lead_a + wander + noise * rng.standard_normal(n)
    lead_b = person_scale * lead_b + 0.7 * wander + noise * rng.standard_normal(n)
    r_indices = np.round(np.array(centers) * rate_hz).astype(np.int64)
    return np.column_stack([lead_a, lead_b]), r_indices


def make_csv_database(
    root: Path,
    classes: list[str],
    records_per_class: int,
    rate_hz: int,
    seed: int,
    duration_s: float = 30.0,
    lead_names: tuple[str, str] = ("V4", "V5"),
) -> Path:
    """CSV waveform files plus a labels.csv manifest; returns the manifest."""
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    for label in classes:
        for k in range(records_per_class):
            signals, _ = render_record(
                SHAPES[label], duration_s, rate_hz, rng, person_scale=rng.uniform(0.85, 1.15)
            )
            name = f"{label.lower()}_{k}.csv"
            with open(root / name, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(lead_names)
                for row in signals:
                    writer.writerow([f"{v:.6f}" for v in row])
            rows.append((name, label, rate_hz))
    manifest = root / "labels.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record", "label", "rate_hz"])
        writer.writerows(rows)
    return manifest


# annotation codes for the synthetic wfdb database, matching the beat map
CLASS_TO_CODE = {"Normal": 1, "LBBB": 2, "RBBB": 3, "PACE": 12, "PVC": 5, "APB": 8, "FVNB": 6, "FPNB": 38}


def make_wfdb_database(
    root: Path,
    class_records: dict[str, list[str]],
    rate_hz: int,
    seed: int,
    duration_s: float = 30.0,
) -> Path:
    """Synthetic WFDB database: one annotated format-212 record per entry.

    Every beat in a record carries that record's class code, mirroring how
    the class-source protocol consumes single-condition records.
    """
    rng = np.random.default_rng(seed)
    for label, record_ids in class_records.items():
        code = CLASS_TO_CODE[label]
        for record_id in record_ids:
            signals, r_idx = render_record(
                SHAPES[label], duration_s, rate_hz, rng, person_scale=rng.uniform(0.9, 1.1)
            )
            write_wfdb_record(root, record_id, signals, rate_hz)
            write_atr(root / f"{record_id}.atr", [(int(r), code) for r in r_idx])
    return root
