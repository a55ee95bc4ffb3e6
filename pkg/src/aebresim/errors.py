"""Exception hierarchy shared across the toolkit."""


class AebresimError(Exception):
    """Base class for all errors raised by this package."""


# --- recording ingest ---------------------------------------------------

class RecordingParseError(AebresimError):
    """Raised when a recording cannot be parsed from its CSV streams."""


class MalformedRow(RecordingParseError):
    def __init__(self, message: str, row: int, column: str | None = None):
        loc = f"row {row}" + (f", column {column!r}" if column else "")
        super().__init__(f"{message} ({loc})")
        self.row = row
        self.column = column


class DuplicateFrame(RecordingParseError):
    def __init__(self, track_id, frame: int, row: int):
        super().__init__(
            f"track {track_id}: duplicate or non-increasing frame {frame} (row {row})"
        )
        self.track_id = track_id
        self.frame = frame
        self.row = row


class FrameGap(RecordingParseError):
    def __init__(self, track_id, frame: int, row: int):
        super().__init__(f"track {track_id}: gap before frame {frame} (row {row})")
        self.track_id = track_id
        self.frame = frame
        self.row = row


class TrackTooShort(RecordingParseError):
    def __init__(self, track_id, n: int):
        super().__init__(f"track {track_id}: {n} sample(s), need at least 2")
        self.track_id = track_id


class EmptyRecording(RecordingParseError):
    pass


# --- preprocessing ------------------------------------------------------

class SeriesTooShort(AebresimError):
    pass


class MissingDimension(AebresimError):
    pass


# --- geometry -----------------------------------------------------------

class LengthMismatch(AebresimError):
    pass


# --- event store --------------------------------------------------------

class StoreError(AebresimError):
    pass


class SchemaVersionMismatch(StoreError):
    pass


class MalformedLine(StoreError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownEvent(StoreError):
    pass


class DuplicateStage(StoreError):
    pass


class StageOrderViolation(StoreError):
    """A stage was submitted before its prerequisite (e.g. Q5 before reveal)."""


# --- agreement metrics --------------------------------------------------

class MetricsError(AebresimError):
    pass


class InsufficientData(MetricsError):
    """Not enough pairable ratings to evaluate the coefficient."""


class MissingRating(MetricsError):
    pass


class UnclassifiedEvent(MetricsError):
    pass


# --- pipeline / CLI -----------------------------------------------------

class ConfigError(AebresimError):
    """Invalid configuration; maps to exit code 2 on the command line."""


class DataError(AebresimError):
    """Unusable input data; maps to exit code 3 on the command line."""
