"""CSV waveform ingestion: one column per lead, one row per sample."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import ParseError
from .types import EcgRecord, LeadSignal


def read_csv_record(
    csv_path: str | Path,
    sampling_rate_hz: int,
    lead_names: list[str] | None = None,
    *,
    header: bool = False,
) -> EcgRecord:
    """Read a rectangular numeric CSV into an EcgRecord.

    With ``header=True`` the first row holds lead names; an explicit
    ``lead_names`` list overrides them and must match the column count.
    """
    csv_path = Path(csv_path)
    if sampling_rate_hz <= 0:
        raise ValueError(f"sampling rate must be positive, got {sampling_rate_hz}")

    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]

    if header:
        if not rows:
            raise ParseError(f"{csv_path}: empty file")
        names_from_file = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        if lead_names is None:
            lead_names = names_from_file
    if not rows:
        raise ParseError(f"{csv_path}: no data rows")

    n_cols = len(rows[0])
    if lead_names is None:
        lead_names = [f"ch{i}" for i in range(n_cols)]
    if len(lead_names) != n_cols:
        raise ParseError(
            f"{csv_path}: {len(lead_names)} lead names declared but rows have {n_cols} columns"
        )

    data = np.empty((len(rows), n_cols), dtype=np.float64)
    for r, row in enumerate(rows):
        row_no = r + 2 if header else r + 1
        if len(row) != n_cols:
            raise ParseError(f"{csv_path}: row {row_no} has {len(row)} cells, expected {n_cols}")
        for c, cell in enumerate(row):
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{csv_path}: row {row_no}, column {c + 1}: non-numeric cell {cell!r}"
                ) from None

    leads = [LeadSignal(name, data[:, i]) for i, name in enumerate(lead_names)]
    return EcgRecord(
        record_id=csv_path.stem,
        sampling_rate_hz=sampling_rate_hz,
        leads=leads,
        duration_samples=len(rows),
    )
