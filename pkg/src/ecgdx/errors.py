"""Exception types shared across the toolkit."""


class EcgdxError(Exception):
    """Base class for all toolkit errors."""


class ParseError(EcgdxError):
    """Malformed input file. Message names the file and offending location."""


class UnsupportedFormatError(EcgdxError):
    """Signal format code other than 212."""


class TruncatedFileError(EcgdxError):
    """Signal file shorter than the header promises."""

    def __init__(self, path, expected_bytes, actual_bytes):
        self.expected_bytes = expected_bytes
        self.actual_bytes = actual_bytes
        super().__init__(
            f"{path}: truncated signal file, expected {expected_bytes} bytes, "
            f"got {actual_bytes}"
        )


class SignalLengthError(EcgdxError):
    """Signal too short for the requested operation."""


class DegenerateSegmentError(EcgdxError):
    """Zero-variance segment where a model fit needs variation."""


class ConfigError(EcgdxError):
    """Invalid configuration value or combination."""


class TrainingError(EcgdxError):
    """Classifier training failed (degenerate data or divergence)."""


class ModelIOError(EcgdxError):
    """Model file cannot be read: corrupt, truncated, or wrong version."""


class ModelKindError(ModelIOError):
    """Loaded model is of a different kind than the caller expected."""
