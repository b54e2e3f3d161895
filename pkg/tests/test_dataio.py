import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecgdx.dataio import (
    BeatClass,
    read_csv_record,
    read_wfdb_annotations,
    read_wfdb_record,
    select_leads,
)
from ecgdx.dataio.types import EcgRecord, LeadSignal
from ecgdx.dataio.wfdb import parse_header, read_annotations_with_report, unpack_212
from ecgdx.errors import ParseError, TruncatedFileError, UnsupportedFormatError

from wfdb_fixtures import decode_atr_reference, pack_212, write_atr, write_wfdb_record


def make_record(n=1000, names=("MLII", "V1"), rate=360):
    data = np.linspace(-1, 1, n)
    return EcgRecord("test", rate, [LeadSignal(name, data) for name in names])


class TestFormat212:
    def test_hand_packed_pair(self, tmp_path):
        # (+1, -1): b0=0x01, b1 = high nibble of -1 (0xF) << 4 | high nibble of +1
        raw = bytes([0x01, 0xF0, 0xFF])
        assert list(unpack_212(raw, 2)) == [1, -1]

    def test_all_zero_bytes(self):
        assert np.all(unpack_212(bytes(30), 20) == 0)

    def test_extremes(self):
        values = np.array([-2048, 2047, 0, -1, 1, 2047, -2048, 5])
        assert np.array_equal(unpack_212(pack_212(values), 8), values)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(min_value=-2048, max_value=2047), min_size=1, max_size=64))
    def test_roundtrip_property(self, values):
        arr = np.array(values, dtype=np.int64)
        assert np.array_equal(unpack_212(pack_212(arr), arr.size), arr)

    def test_truncated_signal_file(self, tmp_path):
        path = write_wfdb_record(tmp_path, "t1", np.zeros((100, 2)))
        dat = tmp_path / "t1.dat"
        dat.write_bytes(dat.read_bytes()[:-10])
        with pytest.raises(TruncatedFileError) as err:
            read_wfdb_record(path)
        assert err.value.expected_bytes > err.value.actual_bytes


class TestHeader:
    def test_two_lead_record_shape(self, tmp_path):
        rng = np.random.default_rng(0)
        signals = rng.uniform(-2, 2, size=(650, 2))
        path = write_wfdb_record(tmp_path, "r100", signals, rate_hz=360)
        record = read_wfdb_record(path)
        assert record.sampling_rate_hz == 360
        assert record.duration_samples == 650
        assert record.lead_names == ["MLII", "V1"]
        assert all(len(lead) == 650 for lead in record.leads)

    def test_gain_baseline_conversion(self, tmp_path):
        signals = np.full((50, 1), 1.5)
        path = write_wfdb_record(tmp_path, "g1", signals, lead_names=("MLII",), gain=100.0, baseline=512)
        record = read_wfdb_record(path)
        assert np.allclose(record.leads[0].samples, 1.5)

    def test_gain_with_parenthesized_baseline(self, tmp_path):
        (tmp_path / "p.hea").write_text("p 1 360 4\np.dat 212 200(1024)/mV 11 0 0 0 0 MLII\n")
        (tmp_path / "p.dat").write_bytes(pack_212(np.array([1024, 1224, 824, 1024])))
        record = read_wfdb_record(tmp_path / "p.hea")
        assert np.allclose(record.leads[0].samples, [0.0, 1.0, -1.0, 0.0])

    def test_unsupported_format_code(self, tmp_path):
        (tmp_path / "f.hea").write_text("f 1 360 4\nf.dat 16 200 11 0 0 0 0 MLII\n")
        (tmp_path / "f.dat").write_bytes(bytes(8))
        with pytest.raises(UnsupportedFormatError):
            read_wfdb_record(tmp_path / "f.hea")

    def test_malformed_header_names_line(self, tmp_path):
        (tmp_path / "m.hea").write_text("m 2 360\n")
        with pytest.raises(ParseError) as err:
            parse_header(tmp_path / "m.hea")
        assert "line 1" in str(err.value)

    def test_missing_signal_file(self, tmp_path):
        (tmp_path / "x.hea").write_text("x 1 360 4\nx.dat 212 200 11 0 0 0 0 MLII\n")
        with pytest.raises(ParseError):
            read_wfdb_record(tmp_path / "x.hea")


class TestAnnotations:
    def test_single_normal_beat(self, tmp_path):
        path = tmp_path / "a.atr"
        write_atr(path, [(1000, 1)])
        record = make_record(n=2000)
        beats = read_wfdb_annotations(path, record)
        assert [(b.sample_index, b.label) for b in beats] == [(1000, BeatClass.NORMAL)]

    def test_rhythm_change_filtered(self, tmp_path):
        path = tmp_path / "a.atr"
        write_atr(path, [(100, 28), (200, 1)])  # 28 = rhythm change
        beats, skipped = read_annotations_with_report(path, make_record())
        assert [(b.sample_index, b.label) for b in beats] == [(200, BeatClass.NORMAL)]
        assert skipped == {"+": 1}

    def test_unknown_beat_code_skipped_not_fatal(self, tmp_path):
        path = tmp_path / "a.atr"
        write_atr(path, [(100, 1), (200, 9), (300, 2)])  # 9 = SVPB, unmapped beat
        beats, skipped = read_annotations_with_report(path, make_record())
        assert [b.label for b in beats] == [BeatClass.NORMAL, BeatClass.LBBB]
        assert skipped == {"S": 1}

    def test_long_gap_uses_skip_token(self, tmp_path):
        path = tmp_path / "a.atr"
        record = EcgRecord("t", 360, [LeadSignal("MLII", np.zeros(800000))])
        write_atr(path, [(5, 1), (700000, 5)])
        beats = read_wfdb_annotations(path, record)
        assert [(b.sample_index, b.label) for b in beats] == [
            (5, BeatClass.NORMAL),
            (700000, BeatClass.PVC),
        ]

    def test_aux_payload_walked(self, tmp_path):
        path = tmp_path / "a.atr"
        write_atr(path, [(50, 28), (90, 1)], aux_notes={0: b"(AFIB"})
        beats = read_wfdb_annotations(path, make_record())
        assert [(b.sample_index, b.label) for b in beats] == [(90, BeatClass.NORMAL)]

    def test_monotonic_and_matches_reference_decoder(self, tmp_path):
        rng = np.random.default_rng(7)
        samples = np.cumsum(rng.integers(5, 2500, size=300))
        codes = rng.choice([1, 2, 3, 5, 6, 8, 12, 38, 14, 28], size=300)
        path = tmp_path / "big.atr"
        write_atr(path, list(zip(samples.tolist(), codes.tolist())))
        record = EcgRecord("t", 360, [LeadSignal("MLII", np.zeros(int(samples[-1]) + 10))])
        beats, skipped = read_annotations_with_report(path, record)

        reference = decode_atr_reference(path)
        from ecgdx.dataio.wfdb import BEAT_CODE_TO_CLASS

        ref_beats = [(s, c) for s, c in reference if c in BEAT_CODE_TO_CLASS]
        assert len(beats) == len(ref_beats)
        assert [b.sample_index for b in beats] == [s for s, _ in ref_beats]
        idx = [b.sample_index for b in beats]
        assert all(a < b for a, b in zip(idx, idx[1:]))

    def test_out_of_range_annotation(self, tmp_path):
        path = tmp_path / "a.atr"
        write_atr(path, [(5000, 1)])
        with pytest.raises(ParseError):
            read_wfdb_annotations(path, make_record(n=100))


class TestCsv:
    def test_shape_12_leads(self, tmp_path):
        rng = np.random.default_rng(1)
        path = tmp_path / "r.csv"
        rows = rng.standard_normal((5000, 12))
        path.write_text("\n".join(",".join(f"{v:.4f}" for v in row) for row in rows))
        names = [f"L{i}" for i in range(12)]
        record = read_csv_record(path, 500, names)
        assert len(record.leads) == 12
        assert record.duration_samples == 5000
        assert record.duration_samples / record.sampling_rate_hz == 10.0

    def test_empty_file(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            read_csv_record(path, 360, ["a"])

    def test_two_columns(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("1,2\n3,4\n")
        record = read_csv_record(path, 360, ["a", "b"])
        assert record.lead_names == ["a", "b"]
        assert np.array_equal(record.leads[1].samples, [2.0, 4.0])

    def test_header_row(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("V4,V5\n1,2\n3,4\n")
        record = read_csv_record(path, 500, header=True)
        assert record.lead_names == ["V4", "V5"]
        assert record.duration_samples == 2

    def test_ragged_row_error_names_row(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(ParseError, match="row 2"):
            read_csv_record(path, 360, ["a", "b"])

    def test_non_numeric_cell_names_position(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("1,2\n3,oops\n")
        with pytest.raises(ParseError, match="row 2, column 2"):
            read_csv_record(path, 360, ["a", "b"])


class TestSelectLeads:
    def test_subset_and_order(self):
        record = make_record(names=("I", "V2", "V5"))
        out = select_leads(record, ["V5", "V2"])
        assert out.lead_names == ["V5", "V2"]

    def test_missing_lead_lists_available(self):
        record = make_record()
        with pytest.raises(LookupError, match="MLII"):
            select_leads(record, ["V9"])

    def test_empty_selection(self):
        with pytest.raises(ValueError):
            select_leads(make_record(), [])

    def test_idempotent(self):
        record = make_record(names=("A", "B", "C"))
        once = select_leads(record, ["C", "A"])
        twice = select_leads(once, ["C", "A"])
        assert once.lead_names == twice.lead_names
        for l1, l2 in zip(once.leads, twice.leads):
            assert np.array_equal(l1.samples, l2.samples)


class TestBeatClass:
    def test_apb_aliases_apc(self):
        assert BeatClass.APB is BeatClass.APC
        assert BeatClass.parse("APB") is BeatClass.APC
        assert BeatClass.parse("Normal") is BeatClass.NORMAL

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            BeatClass.parse("XYZ")
