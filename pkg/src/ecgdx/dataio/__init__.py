"""Record and annotation ingestion: WFDB format 212, MIT annotations, CSV."""

from .csvio import read_csv_record
from .types import (
    CROSSDB_CLASSES,
    MITBIH_CLASSES,
    SPHC_CLASSES,
    BeatAnnotation,
    BeatClass,
    EcgRecord,
    LeadSignal,
    select_leads,
)
from .wfdb import (
    BEAT_CODE_TO_CLASS,
    BEAT_SYMBOL_TO_CLASS,
    data_dir_from_env,
    find_records,
    parse_header,
    read_annotations_with_report,
    read_wfdb_annotations,
    read_wfdb_record,
    record_paths,
    unpack_212,
)

# Records the eight-class experiment draws each class from. FPNB needs two
# records combined to reach a usable beat count.
MITBIH_CLASS_SOURCES: dict[BeatClass, tuple[str, ...]] = {
    BeatClass.NORMAL: ("100",),
    BeatClass.LBBB: ("109",),
    BeatClass.RBBB: ("118",),
    BeatClass.PACE: ("107",),
    BeatClass.PVC: ("208",),
    BeatClass.APC: ("232",),
    BeatClass.FVNB: ("213",),
    BeatClass.FPNB: ("104", "217"),
}

__all__ = [
    "BEAT_CODE_TO_CLASS",
    "BEAT_SYMBOL_TO_CLASS",
    "CROSSDB_CLASSES",
    "MITBIH_CLASSES",
    "MITBIH_CLASS_SOURCES",
    "SPHC_CLASSES",
    "BeatAnnotation",
    "BeatClass",
    "EcgRecord",
    "LeadSignal",
    "data_dir_from_env",
    "find_records",
    "parse_header",
    "read_annotations_with_report",
    "read_csv_record",
    "read_wfdb_annotations",
    "read_wfdb_record",
    "record_paths",
    "select_leads",
    "unpack_212",
]
