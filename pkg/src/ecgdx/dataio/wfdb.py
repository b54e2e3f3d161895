"""Native readers for WFDB records: .hea headers, format-212 signals, .atr annotations.

Only signal format 212 (the MIT-BIH packing) is supported; other format
codes raise :class:`UnsupportedFormatError`.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ParseError, TruncatedFileError, UnsupportedFormatError
from .types import BeatAnnotation, BeatClass, EcgRecord, LeadSignal

# MIT annotation code numbers -> mnemonic characters (standard table).
ANNOTATION_MNEMONICS = {
    1: "N", 2: "L", 3: "R", 4: "a", 5: "V", 6: "F", 7: "J", 8: "A", 9: "S",
    10: "E", 11: "j", 12: "/", 13: "Q", 14: "~", 16: "|", 18: "s", 19: "T",
    20: "*", 21: "D", 22: '"', 23: "=", 24: "p", 25: "B", 26: "^", 27: "t",
    28: "+", 29: "u", 30: "?", 31: "!", 32: "[", 33: "]", 34: "e", 35: "n",
    36: "@", 37: "x", 38: "f", 39: "(", 40: ")", 41: "r",
}

# Codes that mark a QRS complex (as opposed to rhythm changes, noise, waves...).
BEAT_CODES = frozenset({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 25, 30, 34, 35, 38, 41})

# The eight classes the classifiers are trained on; every other beat code is
# skipped (counted, not fatal) at ingestion.
BEAT_CODE_TO_CLASS = {
    1: BeatClass.NORMAL,    # N
    2: BeatClass.LBBB,      # L
    3: BeatClass.RBBB,      # R
    12: BeatClass.PACE,     # /
    5: BeatClass.PVC,       # V
    8: BeatClass.APC,       # A
    6: BeatClass.FVNB,      # F
    38: BeatClass.FPNB,     # f
}

BEAT_SYMBOL_TO_CLASS = {ANNOTATION_MNEMONICS[c]: k for c, k in BEAT_CODE_TO_CLASS.items()}

_FMT_RE = re.compile(r"^(\d+)")
_GAIN_RE = re.compile(r"^([-+0-9.eE]+)(?:\(([-+0-9]+)\))?(?:/(\S+))?$")


@dataclass
class SignalSpec:
    """One signal line of a .hea header."""

    file_name: str
    format_code: int
    gain: float
    baseline: int
    lead_name: str


@dataclass
class HeaderInfo:
    record_name: str
    n_signals: int
    sampling_rate_hz: int
    n_samples: int
    signals: list[SignalSpec]


def parse_header(header_path: str | Path) -> HeaderInfo:
    """Parse a .hea file. Raises ParseError naming the offending line."""
    header_path = Path(header_path)
    lines = [
        line.strip()
        for line in header_path.read_text().splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise ParseError(f"{header_path}: empty header")

    first = lines[0].split()
    if len(first) < 4:
        raise ParseError(f"{header_path}: line 1 needs record name, lead count, rate, sample count: {lines[0]!r}")
    record_name = first[0]
    if "/" in record_name:
        raise UnsupportedFormatError(f"{header_path}: multi-segment records are not supported")
    try:
        n_signals = int(first[1])
        rate = int(float(first[2].split("/")[0]))
        n_samples = int(first[3])
    except ValueError as exc:
        raise ParseError(f"{header_path}: line 1: {exc}: {lines[0]!r}") from None
    if n_signals < 1 or rate <= 0 or n_samples < 1:
        raise ParseError(f"{header_path}: line 1 has non-positive counts: {lines[0]!r}")
    if len(lines) - 1 < n_signals:
        raise ParseError(f"{header_path}: header declares {n_signals} signals but has {len(lines) - 1} signal lines")

    signals = []
    for i in range(n_signals):
        line_no = i + 2
        tokens = lines[1 + i].split()
        if len(tokens) < 3:
            raise ParseError(f"{header_path}: line {line_no}: need file name, format, gain: {lines[1 + i]!r}")
        fmt_match = _FMT_RE.match(tokens[1])
        if not fmt_match:
            raise ParseError(f"{header_path}: line {line_no}: bad format field {tokens[1]!r}")
        format_code = int(fmt_match.group(1))
        extra = tokens[1][fmt_match.end():]
        if extra and not extra.startswith(("x1", ":0", "+0")):
            raise UnsupportedFormatError(
                f"{header_path}: line {line_no}: format modifier {extra!r} not supported"
            )
        gain_match = _GAIN_RE.match(tokens[2])
        if not gain_match:
            raise ParseError(f"{header_path}: line {line_no}: bad gain field {tokens[2]!r}")
        gain = float(gain_match.group(1))
        if gain == 0.0:
            gain = 200.0  # WFDB default when the header stores 0
        if gain_match.group(2) is not None:
            baseline = int(gain_match.group(2))
        elif len(tokens) >= 5:
            try:
                baseline = int(tokens[4])  # ADC zero doubles as baseline
            except ValueError:
                raise ParseError(f"{header_path}: line {line_no}: bad ADC zero {tokens[4]!r}") from None
        else:
            baseline = 0
        lead_name = " ".join(tokens[8:]) if len(tokens) > 8 else f"ch{i}"
        signals.append(SignalSpec(tokens[0], format_code, gain, baseline, lead_name))

    return HeaderInfo(record_name, n_signals, rate, n_samples, signals)


def unpack_212(data: bytes, n_values: int) -> np.ndarray:
    """Decode ``n_values`` 12-bit two's-complement samples from format-212 bytes.

    Layout per pair (s0, s1) in 3 bytes: b0 = low 8 bits of s0,
    b1 = high nibble of s1 (bits 4-7) | high nibble of s0 (bits 0-3),
    b2 = low 8 bits of s1.
    """
    n_pairs = n_values // 2
    tail = n_values % 2
    min_bytes = n_pairs * 3 + (2 if tail else 0)
    if len(data) < min_bytes:
        raise TruncatedFileError("<buffer>", min_bytes, len(data))
    buf = np.zeros(((n_values + 1) // 2) * 3, dtype=np.uint8)
    use = min(len(data), buf.size)
    buf[:use] = np.frombuffer(data, dtype=np.uint8, count=use)
    triplets = buf.reshape(-1, 3).astype(np.int32)
    low = ((triplets[:, 1] & 0x0F) << 8) | triplets[:, 0]
    high = ((triplets[:, 1] & 0xF0) << 4) | triplets[:, 2]
    values = np.empty(triplets.shape[0] * 2, dtype=np.int32)
    values[0::2] = low
    values[1::2] = high
    values = values[:n_values]
    values[values >= 2048] -= 4096
    return values


def read_wfdb_record(header_path: str | Path) -> EcgRecord:
    """Read a WFDB record (header + format-212 signal files) into physical units."""
    header_path = Path(header_path)
    info = parse_header(header_path)
    for spec in info.signals:
        if spec.format_code != 212:
            raise UnsupportedFormatError(
                f"{header_path}: signal {spec.lead_name!r} uses format {spec.format_code}; only 212 is supported"
            )

    # Signals sharing a .dat file are interleaved sample by sample in header order.
    groups: dict[str, list[int]] = {}
    for idx, spec in enumerate(info.signals):
        groups.setdefault(spec.file_name, []).append(idx)

    leads: list[LeadSignal | None] = [None] * info.n_signals
    for file_name, indices in groups.items():
        sig_path = header_path.parent / file_name
        if not sig_path.exists():
            raise ParseError(f"{header_path}: signal file {sig_path} does not exist")
        data = sig_path.read_bytes()
        total = len(indices) * info.n_samples
        try:
            values = unpack_212(data, total)
        except TruncatedFileError as exc:
            raise TruncatedFileError(sig_path, exc.expected_bytes, exc.actual_bytes) from None
        frames = values.reshape(info.n_samples, len(indices))
        for col, idx in enumerate(indices):
            spec = info.signals[idx]
            physical = (frames[:, col] - spec.baseline) / spec.gain
            leads[idx] = LeadSignal(spec.lead_name, physical)

    return EcgRecord(
        record_id=info.record_name,
        sampling_rate_hz=info.sampling_rate_hz,
        leads=[lead for lead in leads if lead is not None],
        duration_samples=info.n_samples,
    )


@dataclass
class RawAnnotation:
    sample_index: int
    code: int

    @property
    def symbol(self) -> str:
        return ANNOTATION_MNEMONICS.get(self.code, "?")


def read_annotation_tokens(annotation_path: str | Path) -> list[RawAnnotation]:
    """Walk a MIT-format annotation stream and return (sample, code) events.

    Handles the standard token kinds: SKIP (59) with its 4-byte interval in
    PDP-11 word order, the NUM/SUB/CHN modifiers (60-62), and AUX (63) with
    its padded byte payload.
    """
    data = Path(annotation_path).read_bytes()
    out: list[RawAnnotation] = []
    time = 0
    pos = 0
    pending_skip = 0
    while pos + 1 < len(data):
        word = data[pos] | (data[pos + 1] << 8)
        pos += 2
        code = word >> 10
        interval = word & 0x3FF
        if code == 0 and interval == 0:
            break  # end of stream
        if code == 59:  # SKIP: next two words hold a 32-bit interval, high word first
            if pos + 3 >= len(data):
                raise ParseError(f"{annotation_path}: truncated SKIP token at byte {pos - 2}")
            high = data[pos] | (data[pos + 1] << 8)
            low = data[pos + 2] | (data[pos + 3] << 8)
            pos += 4
            skip = (high << 16) | low
            if skip >= 1 << 31:
                skip -= 1 << 32
            pending_skip += skip
        elif code == 60 or code == 61 or code == 62:
            continue  # NUM / SUB / CHN modify the previous annotation; no time advance
        elif code == 63:  # AUX: interval counts payload bytes, padded to even
            aux_len = interval + (interval & 1)
            if pos + aux_len > len(data):
                raise ParseError(f"{annotation_path}: truncated AUX payload at byte {pos - 2}")
            pos += aux_len
        else:
            time += interval + pending_skip
            pending_skip = 0
            out.append(RawAnnotation(time, code))
    return out


def read_annotations_with_report(
    annotation_path: str | Path, record: EcgRecord
) -> tuple[list[BeatAnnotation], dict[str, int]]:
    """Decode beat annotations plus a report of everything that was dropped.

    The report counts, by mnemonic symbol, non-beat annotations (filtered)
    and beat codes outside the eight-class mapping (skipped).
    """
    beats: list[BeatAnnotation] = []
    skipped: dict[str, int] = {}
    for raw in read_annotation_tokens(annotation_path):
        if raw.code not in BEAT_CODES:
            skipped[raw.symbol] = skipped.get(raw.symbol, 0) + 1
            continue
        label = BEAT_CODE_TO_CLASS.get(raw.code)
        if label is None:
            skipped[raw.symbol] = skipped.get(raw.symbol, 0) + 1
            continue
        if raw.sample_index < 0 or raw.sample_index >= record.duration_samples:
            raise ParseError(
                f"{annotation_path}: annotation at sample {raw.sample_index} outside record "
                f"of {record.duration_samples} samples"
            )
        beats.append(BeatAnnotation(raw.sample_index, label))
    beats.sort(key=lambda b: b.sample_index)
    return beats, skipped


def read_wfdb_annotations(annotation_path: str | Path, record: EcgRecord) -> list[BeatAnnotation]:
    """Beat annotations in ascending sample order; non-beat markers filtered out."""
    beats, _ = read_annotations_with_report(annotation_path, record)
    return beats


def find_records(data_dir: str | Path) -> list[str]:
    """Record ids for every .hea file directly under ``data_dir``, sorted."""
    return sorted(p.stem for p in Path(data_dir).glob("*.hea"))


def record_paths(data_dir: str | Path, record_id: str) -> tuple[Path, Path]:
    """(header, annotation) paths for a record id under ``data_dir``."""
    base = Path(data_dir) / record_id
    return base.with_suffix(".hea"), base.with_suffix(".atr")


def data_dir_from_env(explicit: str | None = None) -> Path | None:
    """Database root: explicit path if given, else the ECGDX_DATA_DIR variable."""
    if explicit:
        return Path(explicit)
    env = os.environ.get("ECGDX_DATA_DIR")
    return Path(env) if env else None
