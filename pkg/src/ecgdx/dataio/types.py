"""Core record/annotation containers shared by every stage of the pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class BeatClass(str, Enum):
    """Closed label sets for the supported databases.

    MIT-BIH uses the eight beat classes, SPHC the four rhythm classes.
    APB (atrial premature beat) is the same condition as APC and is kept
    as an alias so that cross-database label sets can be written either way.
    """

    NORMAL = "Normal"
    LBBB = "LBBB"
    RBBB = "RBBB"
    PACE = "PACE"
    PVC = "PVC"
    APC = "APC"
    APB = "APC"
    FVNB = "FVNB"
    FPNB = "FPNB"
    SB = "SB"
    SR = "SR"
    AFIB = "AFIB"
    ST = "ST"

    @classmethod
    def parse(cls, text: str) -> "BeatClass":
        """Accept either a member name ("APB") or a value ("Normal")."""
        name = text.strip()
        if name in cls.__members__:
            return cls.__members__[name]
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown beat class {text!r}") from None


MITBIH_CLASSES = (
    BeatClass.NORMAL,
    BeatClass.LBBB,
    BeatClass.RBBB,
    BeatClass.PACE,
    BeatClass.PVC,
    BeatClass.APC,
    BeatClass.FVNB,
    BeatClass.FPNB,
)

SPHC_CLASSES = (BeatClass.SB, BeatClass.SR, BeatClass.AFIB, BeatClass.ST)

CROSSDB_CLASSES = (BeatClass.NORMAL, BeatClass.APB, BeatClass.LBBB, BeatClass.RBBB)


@dataclass
class LeadSignal:
    """One recording channel, amplitudes in physical units (mV)."""

    lead_name: str
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError(f"lead {self.lead_name!r}: samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError(f"lead {self.lead_name!r}: samples contain non-finite values")

    def __len__(self) -> int:
        return self.samples.size


@dataclass
class EcgRecord:
    """Multi-channel sampled signal with a single sampling rate."""

    record_id: str
    sampling_rate_hz: int
    leads: list[LeadSignal]
    duration_samples: int = field(default=0)

    def __post_init__(self):
        if self.sampling_rate_hz <= 0:
            raise ValueError(f"record {self.record_id!r}: sampling rate must be positive")
        if not self.leads:
            raise ValueError(f"record {self.record_id!r}: at least one lead required")
        lengths = {len(lead) for lead in self.leads}
        if len(lengths) != 1:
            raise ValueError(f"record {self.record_id!r}: leads have differing lengths {sorted(lengths)}")
        n = lengths.pop()
        if self.duration_samples == 0:
            self.duration_samples = n
        elif self.duration_samples != n:
            raise ValueError(
                f"record {self.record_id!r}: duration_samples={self.duration_samples} "
                f"but leads have {n} samples"
            )

    @property
    def lead_names(self) -> list[str]:
        return [lead.lead_name for lead in self.leads]

    def lead(self, name: str) -> LeadSignal:
        for lead in self.leads:
            if lead.lead_name == name:
                return lead
        raise LookupError(f"record {self.record_id!r} has no lead {name!r}; available: {self.lead_names}")


@dataclass(frozen=True)
class BeatAnnotation:
    """Expert beat label attached to an R-peak sample index."""

    sample_index: int
    label: BeatClass


def select_leads(record: EcgRecord, names: list[str]) -> EcgRecord:
    """Restrict a record to the named leads, in the requested order."""
    if not names:
        raise ValueError(f"record {record.record_id!r}: empty lead selection")
    selected = [record.lead(name) for name in names]
    return EcgRecord(
        record_id=record.record_id,
        sampling_rate_hz=record.sampling_rate_hz,
        leads=selected,
        duration_samples=record.duration_samples,
    )
