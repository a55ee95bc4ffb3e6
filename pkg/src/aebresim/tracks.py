"""Parsing and validation of top-down trajectory recordings.

The canonical CSV schema uses three files per recording:

* ``*_tracks.csv``: recordingId, trackId, frame, x, y, [heading],
  xVelocity, yVelocity, xAcceleration, yAcceleration
* ``*_tracksMeta.csv``: trackId, class, [width], [length]
* ``*_recordingMeta.csv``: recordingId, frameRate

Units are meters / seconds / radians; adapters rename columns and
convert degree headings at the boundary for real dataset variants.
``heading`` may be omitted entirely (highD-style input), which sets
``Recording.has_heading = False``.  Gzip-compressed files are accepted
by the ``.csv.gz`` extension.
"""

from __future__ import annotations

import csv
import gzip
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Iterable

from .errors import (
    DuplicateFrame,
    EmptyRecording,
    FrameGap,
    MalformedRow,
    TrackTooShort,
)
from .geometry import wrap_angle


class ParticipantClass(str, Enum):
    CAR = "car"
    TRUCK_BUS = "truck_bus"
    VAN = "van"
    MOTORCYCLE = "motorcycle"
    BICYCLE = "bicycle"
    PEDESTRIAN = "pedestrian"
    OTHER = "other"


VRU_CLASSES = frozenset(
    {ParticipantClass.MOTORCYCLE, ParticipantClass.BICYCLE, ParticipantClass.PEDESTRIAN}
)

#: common levelXData-style class labels mapped onto the canonical enum
DEFAULT_CLASS_ALIASES = {
    "car": "car",
    "van": "van",
    "truck": "truck_bus",
    "bus": "truck_bus",
    "truck_bus": "truck_bus",
    "trailer": "truck_bus",
    "motorcycle": "motorcycle",
    "bicycle": "bicycle",
    "cyclist": "bicycle",
    "pedestrian": "pedestrian",
    "other": "other",
}


@dataclass(frozen=True)
class TrackSample:
    frame: int
    t: float
    x: float
    y: float
    vx: float
    vy: float
    ax: float
    ay: float
    heading: float | None = None


@dataclass
class ParticipantMeta:
    track_id: int
    cls: ParticipantClass
    width: float | None = None
    length: float | None = None

    def __post_init__(self):
        for name in ("width", "length"):
            v = getattr(self, name)
            if v is not None and not v > 0.0:
                raise ValueError(f"track {self.track_id}: {name} must be > 0, got {v}")


@dataclass
class Track:
    meta: ParticipantMeta
    samples: list[TrackSample]


@dataclass
class Recording:
    recording_id: str
    fps: float
    has_heading: bool
    tracks: dict[int, Track]

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        for tid, track in self.tracks.items():
            if not track.samples:
                raise ValueError(f"track {tid} is empty")

    @property
    def dt(self) -> float:
        return 1.0 / self.fps

    def frame_range(self) -> tuple[int, int]:
        lo = min(t.samples[0].frame for t in self.tracks.values())
        hi = max(t.samples[-1].frame for t in self.tracks.values())
        return lo, hi


@dataclass
class ColumnAdapters:
    """Thin renaming layer between an input schema and the canonical one.

    ``tracks`` / ``meta`` / ``recording`` map canonical column names to
    the names used in the input files.  ``heading_unit`` converts degree
    headings at the boundary; ``class_aliases`` extends the builtin
    label map.
    """

    tracks: dict[str, str] = field(default_factory=dict)
    meta: dict[str, str] = field(default_factory=dict)
    recording: dict[str, str] = field(default_factory=dict)
    heading_unit: str = "rad"
    class_aliases: dict[str, str] = field(default_factory=dict)

    def resolve_class(self, raw: str) -> ParticipantClass | None:
        label = self.class_aliases.get(raw, DEFAULT_CLASS_ALIASES.get(raw.strip().lower()))
        if label is None:
            return None
        return ParticipantClass(label)


TRACK_COLUMNS = ("recordingId", "trackId", "frame", "x", "y", "xVelocity",
                 "yVelocity", "xAcceleration", "yAcceleration")
META_COLUMNS = ("trackId", "class")
RECMETA_COLUMNS = ("recordingId", "frameRate")


def _reader(stream) -> csv.DictReader:
    if isinstance(stream, (bytes, bytearray)):
        text = stream.decode("utf-8")
    elif hasattr(stream, "read"):
        data = stream.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    else:
        raise TypeError(f"expected bytes or a stream, got {type(stream)!r}")
    return csv.DictReader(io.StringIO(text))


def _require_columns(reader: csv.DictReader, required: Iterable[str], rename: dict[str, str], what: str):
    have = set(reader.fieldnames or ())
    missing = [c for c in required if rename.get(c, c) not in have]
    if missing:
        raise MalformedRow(f"{what} header is missing column(s) {missing}", row=1)


def _float_field(raw: dict, col: str, rename: dict[str, str], row_no: int) -> float:
    name = rename.get(col, col)
    value = raw.get(name)
    if value is None:
        raise MalformedRow("wrong column count", row=row_no, column=col)
    try:
        out = float(value)
    except ValueError:
        raise MalformedRow(f"non-numeric value {value!r}", row=row_no, column=col) from None
    if not math.isfinite(out):
        raise MalformedRow(f"non-finite value {value!r}", row=row_no, column=col)
    return out


def _int_field(raw: dict, col: str, rename: dict[str, str], row_no: int) -> int:
    name = rename.get(col, col)
    value = raw.get(name)
    if value is None:
        raise MalformedRow("wrong column count", row=row_no, column=col)
    try:
        return int(value)
    except ValueError:
        raise MalformedRow(f"non-integer value {value!r}", row=row_no, column=col) from None


def _optional_float(raw: dict, col: str, rename: dict[str, str], row_no: int) -> float | None:
    name = rename.get(col, col)
    value = raw.get(name)
    if value is None or value == "":
        return None
    return _float_field(raw, col, rename, row_no)


def parse_recording(
    tracks_csv: bytes | BinaryIO,
    meta_csv: bytes | BinaryIO,
    recording_meta: bytes | BinaryIO,
    adapters: ColumnAdapters | None = None,
) -> Recording:
    """Parse the three CSV streams of one recording.

    Raises :class:`MalformedRow`, :class:`DuplicateFrame`,
    :class:`FrameGap`, :class:`TrackTooShort` or :class:`EmptyRecording`
    with the offending row/column.  Parsing is strict: frames within a
    track must be strictly increasing and contiguous, every numeric
    field finite, and every track at least two samples long.
    """
    adapters = adapters or ColumnAdapters()

    rec_reader = _reader(recording_meta)
    _require_columns(rec_reader, RECMETA_COLUMNS, adapters.recording, "recording meta")
    rec_rows = list(rec_reader)
    if not rec_rows:
        raise EmptyRecording("recording meta has no rows")
    rid_col = adapters.recording.get("recordingId", "recordingId")
    recording_id = str(rec_rows[0][rid_col])
    fps = _float_field(rec_rows[0], "frameRate", adapters.recording, row_no=2)
    if not fps > 0:
        raise MalformedRow(f"frameRate must be positive, got {fps}", row=2, column="frameRate")

    meta_reader = _reader(meta_csv)
    _require_columns(meta_reader, META_COLUMNS, adapters.meta, "tracks meta")
    metas: dict[int, ParticipantMeta] = {}
    for row_no, raw in enumerate(meta_reader, start=2):
        tid = _int_field(raw, "trackId", adapters.meta, row_no)
        if tid in metas:
            raise MalformedRow(f"duplicate trackId {tid}", row=row_no, column="trackId")
        cls_name = adapters.meta.get("class", "class")
        cls = adapters.resolve_class(raw.get(cls_name, ""))
        if cls is None:
            raise MalformedRow(f"unknown class {raw.get(cls_name)!r}", row=row_no, column="class")
        width = _optional_float(raw, "width", adapters.meta, row_no)
        length = _optional_float(raw, "length", adapters.meta, row_no)
        try:
            metas[tid] = ParticipantMeta(track_id=tid, cls=cls, width=width, length=length)
        except ValueError as exc:
            raise MalformedRow(str(exc), row=row_no, column="width/length") from None

    tracks_reader = _reader(tracks_csv)
    _require_columns(tracks_reader, TRACK_COLUMNS, adapters.tracks, "tracks")
    heading_col = adapters.tracks.get("heading", "heading")
    has_heading = heading_col in (tracks_reader.fieldnames or ())
    to_rad = math.pi / 180.0 if adapters.heading_unit == "deg" else 1.0

    samples: dict[int, list[TrackSample]] = {}
    for row_no, raw in enumerate(tracks_reader, start=2):
        tid = _int_field(raw, "trackId", adapters.tracks, row_no)
        frame = _int_field(raw, "frame", adapters.tracks, row_no)
        heading = None
        if has_heading:
            heading = wrap_angle(_float_field(raw, "heading", adapters.tracks, row_no) * to_rad)
        sample = TrackSample(
            frame=frame,
            t=frame / fps,
            x=_float_field(raw, "x", adapters.tracks, row_no),
            y=_float_field(raw, "y", adapters.tracks, row_no),
            vx=_float_field(raw, "xVelocity", adapters.tracks, row_no),
            vy=_float_field(raw, "yVelocity", adapters.tracks, row_no),
            ax=_float_field(raw, "xAcceleration", adapters.tracks, row_no),
            ay=_float_field(raw, "yAcceleration", adapters.tracks, row_no),
            heading=heading,
        )
        bucket = samples.setdefault(tid, [])
        if bucket:
            prev = bucket[-1].frame
            if frame <= prev:
                raise DuplicateFrame(tid, frame, row_no)
            if frame != prev + 1:
                raise FrameGap(tid, frame, row_no)
        bucket.append(sample)

    if not samples:
        raise EmptyRecording("tracks stream has no data rows")

    tracks: dict[int, Track] = {}
    for tid, rows in samples.items():
        if len(rows) < 2:
            raise TrackTooShort(tid, len(rows))
        meta = metas.get(tid)
        if meta is None:
            raise MalformedRow(f"track {tid} has no meta row", row=1, column="trackId")
        tracks[tid] = Track(meta=meta, samples=rows)

    return Recording(recording_id=recording_id, fps=fps, has_heading=has_heading, tracks=tracks)


def serialize_recording(rec: Recording) -> tuple[bytes, bytes, bytes]:
    """Serialize back to the canonical three-file CSV schema.

    Floats are written with ``repr`` so that re-parsing yields an equal
    Recording (lossless round trip).
    """
    def fmt(v) -> str:
        return repr(float(v))

    tracks_buf = io.StringIO()
    cols = list(TRACK_COLUMNS)
    if rec.has_heading:
        cols.insert(5, "heading")
    w = csv.writer(tracks_buf, lineterminator="\n")
    w.writerow(cols)
    for tid in sorted(rec.tracks):
        for s in rec.tracks[tid].samples:
            row = [rec.recording_id, tid, s.frame, fmt(s.x), fmt(s.y)]
            if rec.has_heading:
                row.append(fmt(s.heading))
            row += [fmt(s.vx), fmt(s.vy), fmt(s.ax), fmt(s.ay)]
            w.writerow(row)

    meta_buf = io.StringIO()
    w = csv.writer(meta_buf, lineterminator="\n")
    w.writerow(["trackId", "class", "width", "length"])
    for tid in sorted(rec.tracks):
        m = rec.tracks[tid].meta
        w.writerow([
            tid,
            m.cls.value,
            "" if m.width is None else fmt(m.width),
            "" if m.length is None else fmt(m.length),
        ])

    rec_buf = io.StringIO()
    w = csv.writer(rec_buf, lineterminator="\n")
    w.writerow(["recordingId", "frameRate"])
    w.writerow([rec.recording_id, fmt(rec.fps)])

    return (
        tracks_buf.getvalue().encode("utf-8"),
        meta_buf.getvalue().encode("utf-8"),
        rec_buf.getvalue().encode("utf-8"),
    )


def open_maybe_gzip(path: str | Path) -> BinaryIO:
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_recording(
    tracks_path: str | Path,
    meta_path: str | Path,
    recmeta_path: str | Path,
    adapters: ColumnAdapters | None = None,
) -> Recording:
    with open_maybe_gzip(tracks_path) as t, open_maybe_gzip(meta_path) as m, \
            open_maybe_gzip(recmeta_path) as r:
        return parse_recording(t, m, r, adapters)


# --- report-only validation ----------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    track_id: int
    kind: str
    frame: int | None
    message: str


@dataclass
class ValidationReport:
    issues: list[ValidationIssue]

    @property
    def ok(self) -> bool:
        return not self.issues

    def by_kind(self, kind: str) -> list[ValidationIssue]:
        return [i for i in self.issues if i.kind == kind]


def validate_recording(rec: Recording, jerk_bound: float = 50.0) -> ValidationReport:
    """Report per-track data issues without rejecting the recording.

    ``jerk_bound`` caps the acceleration implied by per-frame speed
    steps (|dv| * fps, m/s^2); larger steps are flagged as
    discontinuities.
    """
    issues: list[ValidationIssue] = []
    for tid, track in rec.tracks.items():
        rows = track.samples
        speeds = [math.hypot(s.vx, s.vy) for s in rows]
        for prev, cur, v0, v1 in zip(rows, rows[1:], speeds, speeds[1:]):
            if cur.frame != prev.frame + 1:
                issues.append(ValidationIssue(tid, "frame_gap", cur.frame,
                                              f"frames jump {prev.frame} -> {cur.frame}"))
            if abs(v1 - v0) * rec.fps > jerk_bound:
                issues.append(ValidationIssue(tid, "speed_discontinuity", cur.frame,
                                              f"|dv|*fps = {abs(v1 - v0) * rec.fps:.1f} m/s^2"))
        for s in rows:
            values = (s.x, s.y, s.vx, s.vy, s.ax, s.ay) + (() if s.heading is None else (s.heading,))
            if not all(math.isfinite(v) for v in values):
                issues.append(ValidationIssue(tid, "non_finite", s.frame, "non-finite value"))
        if track.meta.cls not in VRU_CLASSES:
            if track.meta.width is None or track.meta.length is None:
                issues.append(ValidationIssue(tid, "missing_dimension", None,
                                              f"{track.meta.cls.value} without width/length"))
    return ValidationReport(issues=issues)
