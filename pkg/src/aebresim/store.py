"""Persistent store for brake events, classifications and annotations.

The store is a directory of JSONL files (``events.jsonl``,
``classifications.jsonl``, ``annotations.jsonl``, ``replays.jsonl``),
each starting with a schema-version header line.  Files are diff-able
and append-friendly; annotations are strictly append-only.  The store
assumes a single writer per directory; readers may run concurrently.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .aebs import (
    BrakeEvent,
    CollisionPrediction,
    InterventionLevel,
    PredictedTrajectory,
    SnippetSample,
)
from .classifier import Classification, PseudoGroundTruth, Reason, Verdict
from .errors import (
    DuplicateStage,
    MalformedLine,
    SchemaVersionMismatch,
    StageOrderViolation,
    UnknownEvent,
)
from .geometry import MDSeries

SCHEMA_VERSION = 1
BUG_FLAGS = ("bbox_overlap", "implausible_motion", "other")
LIKERT_MIN, LIKERT_MAX = 1, 5


def event_id(dataset: str, recording_id: str, ego_id: int, object_id: int,
             frame: int, level: str) -> str:
    """Deterministic content hash of the identifying tuple (64 hex chars)."""
    canonical = f"{dataset}|{recording_id}|{ego_id}|{object_id}|{frame}|{level}"
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def utc_now() -> str:
    """Current time as RFC 3339 in UTC."""
    return datetime.now(timezone.utc).isoformat()


# --- annotations ----------------------------------------------------------

@dataclass
class Annotation:
    """Merged view of one rater's answers for one event."""

    event_id: str
    rater_id: str
    q1: int
    q2: int
    q3: int
    q4: int
    q5: int | None = None
    bug_flags: set[str] = field(default_factory=set)
    created_at: str = ""
    revealed_at: str | None = None

    def __post_init__(self):
        for name in ("q1", "q2", "q3", "q4"):
            _check_likert(name, getattr(self, name))
        if self.q5 is not None:
            _check_likert("q5", self.q5)
            if self.revealed_at is None:
                raise ValueError("q5 requires a reveal timestamp")
        unknown = self.bug_flags - set(BUG_FLAGS)
        if unknown:
            raise ValueError(f"unknown bug flags {sorted(unknown)}")


def _check_likert(name: str, value) -> None:
    if not isinstance(value, int) or not LIKERT_MIN <= value <= LIKERT_MAX:
        raise ValueError(f"{name} must be an integer in 1..5, got {value!r}")


# --- JSON codecs ----------------------------------------------------------

def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _md_to_json(md: MDSeries) -> dict:
    return {"t": md.t, "md": md.md}


def _md_from_json(d: dict) -> MDSeries:
    return MDSeries(t=list(d["t"]), md=list(d["md"]))


def _pred_to_json(p: PredictedTrajectory) -> dict:
    return {"poses": [list(q) for q in p.poses], "dims": list(p.dims), "reference": p.reference}


def _pred_from_json(d: dict) -> PredictedTrajectory:
    return PredictedTrajectory(poses=[tuple(q) for q in d["poses"]],
                               dims=tuple(d["dims"]), reference=d["reference"])


def event_to_json(e: BrakeEvent) -> dict:
    return {
        "event_id": e.event_id,
        "dataset": e.dataset,
        "recording_id": e.recording_id,
        "level": e.level.value,
        "cpr": {
            "ego_id": e.cpr.ego_id,
            "object_id": e.cpr.object_id,
            "frame": e.cpr.frame,
            "ttc": e.cpr.ttc,
            "ego_pred": _pred_to_json(e.cpr.ego_pred),
            "obj_pred": _pred_to_json(e.cpr.obj_pred),
            "md_pred": _md_to_json(e.cpr.md_pred),
        },
        "ego_snippet": [[s.t, s.x, s.y, s.psi, s.v, s.a] for s in e.ego_snippet],
        "obj_snippet": [[s.t, s.x, s.y, s.psi, s.v, s.a] for s in e.obj_snippet],
        "track_ended": e.track_ended,
        "documented_collision": e.documented_collision,
    }


def event_from_json(d: dict) -> BrakeEvent:
    c = d["cpr"]
    return BrakeEvent(
        event_id=d["event_id"],
        dataset=d["dataset"],
        recording_id=d["recording_id"],
        level=InterventionLevel(d["level"]),
        cpr=CollisionPrediction(
            ego_id=c["ego_id"], object_id=c["object_id"], frame=c["frame"],
            ego_pred=_pred_from_json(c["ego_pred"]), obj_pred=_pred_from_json(c["obj_pred"]),
            ttc=c["ttc"], md_pred=_md_from_json(c["md_pred"]),
        ),
        ego_snippet=[SnippetSample(*row) for row in d["ego_snippet"]],
        obj_snippet=[SnippetSample(*row) for row in d["obj_snippet"]],
        track_ended=d["track_ended"],
        documented_collision=d["documented_collision"],
    )


@dataclass
class PgtSummary:
    """Persistable part of a pseudo ground truth (for reveal and review)."""

    v0: float
    a0: float
    path_exhausted: bool
    exhausted_t: float | None
    degenerate_path: bool
    t_eval: float
    hyp_poses: list[tuple[float, float, float, float]]
    md_pseudo: MDSeries
    md_observed: MDSeries

    @classmethod
    def from_pgt(cls, pgt: PseudoGroundTruth) -> "PgtSummary":
        h = pgt.hyp_ego
        return cls(v0=h.v0, a0=h.a0, path_exhausted=h.path_exhausted,
                   exhausted_t=h.exhausted_t, degenerate_path=h.degenerate_path,
                   t_eval=pgt.t_eval, hyp_poses=list(h.poses),
                   md_pseudo=pgt.md_pseudo, md_observed=pgt.md_observed)


def _pgt_to_json(p: PgtSummary) -> dict:
    return {
        "v0": p.v0, "a0": p.a0, "path_exhausted": p.path_exhausted,
        "exhausted_t": p.exhausted_t, "degenerate_path": p.degenerate_path,
        "t_eval": p.t_eval, "hyp_poses": [list(q) for q in p.hyp_poses],
        "md_pseudo": _md_to_json(p.md_pseudo), "md_observed": _md_to_json(p.md_observed),
    }


def _pgt_from_json(d: dict) -> PgtSummary:
    return PgtSummary(
        v0=d["v0"], a0=d["a0"], path_exhausted=d["path_exhausted"],
        exhausted_t=d["exhausted_t"], degenerate_path=d["degenerate_path"],
        t_eval=d["t_eval"], hyp_poses=[tuple(q) for q in d["hyp_poses"]],
        md_pseudo=_md_from_json(d["md_pseudo"]), md_observed=_md_from_json(d["md_observed"]),
    )


def classification_to_json(c: Classification) -> dict:
    return {"verdict": c.verdict.value, "reason": c.reason.value,
            "needs_review": c.needs_review}


def classification_from_json(d: dict) -> Classification:
    return Classification(verdict=Verdict(d["verdict"]), reason=Reason(d["reason"]),
                          needs_review=d["needs_review"])


def annotation_to_json(a: Annotation) -> dict:
    return {
        "event_id": a.event_id, "rater_id": a.rater_id,
        "q1": a.q1, "q2": a.q2, "q3": a.q3, "q4": a.q4, "q5": a.q5,
        "bug_flags": sorted(a.bug_flags),
        "created_at": a.created_at, "revealed_at": a.revealed_at,
    }


def annotation_from_json(d: dict) -> Annotation:
    return Annotation(event_id=d["event_id"], rater_id=d["rater_id"],
                      q1=d["q1"], q2=d["q2"], q3=d["q3"], q4=d["q4"], q5=d["q5"],
                      bug_flags=set(d["bug_flags"]), created_at=d["created_at"],
                      revealed_at=d["revealed_at"])


# --- combined record import/export ----------------------------------------

@dataclass
class EventRecord:
    event: BrakeEvent
    pgt: PgtSummary | None = None
    classification: Classification | None = None
    annotations: list[Annotation] = field(default_factory=list)

    @property
    def event_id(self) -> str:
        return self.event.event_id


def _record_to_json(r: EventRecord) -> dict:
    return {
        "event": event_to_json(r.event),
        "pgt": None if r.pgt is None else _pgt_to_json(r.pgt),
        "classification": None if r.classification is None
        else classification_to_json(r.classification),
        "annotations": [annotation_to_json(a) for a in r.annotations],
    }


def _record_from_json(d: dict) -> EventRecord:
    return EventRecord(
        event=event_from_json(d["event"]),
        pgt=None if d["pgt"] is None else _pgt_from_json(d["pgt"]),
        classification=None if d["classification"] is None
        else classification_from_json(d["classification"]),
        annotations=[annotation_from_json(a) for a in d["annotations"]],
    )


def _header_line() -> str:
    return _dump({"schema_version": SCHEMA_VERSION})


def export_events(records: Iterable[EventRecord]) -> bytes:
    """Serialize records to JSONL, sorted by event id; empty in -> empty out."""
    records = sorted(records, key=lambda r: r.event_id)
    if not records:
        return b""
    lines = [_header_line()] + [_dump(_record_to_json(r)) for r in records]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _iter_jsonl(data: bytes, what: str):
    """Yield (line_no, parsed) for data lines after checking the header."""
    text = data.decode("utf-8")
    lines = text.splitlines()
    if not lines:
        return
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise MalformedLine(1, f"{what}: invalid header: {exc}") from None
    if not isinstance(header, dict) or "schema_version" not in header:
        raise SchemaVersionMismatch(f"{what}: missing schema_version header")
    if header["schema_version"] != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"{what}: schema_version {header['schema_version']} != {SCHEMA_VERSION}")
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            yield line_no, json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, f"{what}: {exc}") from None


def import_events(stream: bytes) -> list[EventRecord]:
    data = stream.read() if hasattr(stream, "read") else stream
    out = []
    for line_no, obj in _iter_jsonl(data, "events"):
        try:
            out.append(_record_from_json(obj))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedLine(line_no, f"events: {exc}") from None
    return out


# --- directory-backed store ------------------------------------------------

class EventStore:
    """Directory of JSONL files, single writer, append-only annotations."""

    EVENTS = "events.jsonl"
    CLASSIFICATIONS = "classifications.jsonl"
    ANNOTATIONS = "annotations.jsonl"
    REPLAYS = "replays.jsonl"

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    # -- paths ----------------------------------------------------------
    def path(self, name: str) -> Path:
        return self.root / name

    def _write_file(self, name: str, lines: list[str]) -> Path:
        p = self.path(name)
        data = "\n".join([_header_line()] + lines) + "\n"
        p.write_text(data, encoding="utf-8")
        return p

    def _read_lines(self, name: str):
        p = self.path(name)
        if not p.exists():
            return
        yield from _iter_jsonl(p.read_bytes(), name)

    # -- events ----------------------------------------------------------
    def save_events(self, events: Iterable[BrakeEvent]) -> Path:
        rows = sorted(events, key=lambda e: e.event_id)
        return self._write_file(self.EVENTS, [_dump(event_to_json(e)) for e in rows])

    def load_events(self) -> dict[str, BrakeEvent]:
        out: dict[str, BrakeEvent] = {}
        for line_no, obj in self._read_lines(self.EVENTS):
            try:
                e = event_from_json(obj)
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedLine(line_no, f"events: {exc}") from None
            out[e.event_id] = e
        return out

    # -- classifications ---------------------------------------------------
    def save_classifications(
        self, items: dict[str, tuple[Classification, PgtSummary]]) -> Path:
        lines = []
        for eid in sorted(items):
            cls, pgt = items[eid]
            lines.append(_dump({"event_id": eid,
                                "classification": classification_to_json(cls),
                                "pgt": _pgt_to_json(pgt)}))
        return self._write_file(self.CLASSIFICATIONS, lines)

    def load_classifications(self) -> dict[str, tuple[Classification, PgtSummary]]:
        out = {}
        for line_no, obj in self._read_lines(self.CLASSIFICATIONS):
            try:
                out[obj["event_id"]] = (classification_from_json(obj["classification"]),
                                        _pgt_from_json(obj["pgt"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedLine(line_no, f"classifications: {exc}") from None
        return out

    # -- replays -----------------------------------------------------------
    def save_replays(self, replays: dict[str, dict]) -> Path:
        lines = [_dump({"event_id": eid, **replays[eid]}) for eid in sorted(replays)]
        return self._write_file(self.REPLAYS, lines)

    def load_replays(self) -> dict[str, dict]:
        out = {}
        for _, obj in self._read_lines(self.REPLAYS):
            out[obj["event_id"]] = obj
        return out

    # -- annotations (append-only, staged) ----------------------------------
    def _annotation_rows(self) -> list[dict]:
        return [obj for _, obj in self._read_lines(self.ANNOTATIONS)]

    def _append_row(self, obj: dict) -> None:
        p = self.path(self.ANNOTATIONS)
        with self._write_lock:
            if not p.exists():
                p.write_text(_header_line() + "\n", encoding="utf-8")
            with open(p, "a", encoding="utf-8") as fh:
                fh.write(_dump(obj) + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def stage_state(self, eid: str, rater_id: str) -> dict[str, bool]:
        state = {"stage1": False, "revealed": False, "stage2": False}
        for row in self._annotation_rows():
            if row.get("event_id") == eid and row.get("rater_id") == rater_id:
                kind = row.get("kind")
                if kind == "stage1":
                    state["stage1"] = True
                elif kind == "reveal":
                    state["revealed"] = True
                elif kind == "stage2":
                    state["stage2"] = True
        return state

    def _require_event(self, eid: str) -> None:
        if eid not in self.load_events():
            raise UnknownEvent(eid)

    def append_stage1(self, eid: str, rater_id: str, q: dict[str, int],
                      bug_flags: Iterable[str] = ()) -> dict:
        self._require_event(eid)
        for name in ("q1", "q2", "q3", "q4"):
            _check_likert(name, q.get(name))
        flags = _check_flags(bug_flags)
        if self.stage_state(eid, rater_id)["stage1"]:
            raise DuplicateStage(f"stage1 already submitted by {rater_id} for {eid}")
        row = {"kind": "stage1", "event_id": eid, "rater_id": rater_id,
               "q1": q["q1"], "q2": q["q2"], "q3": q["q3"], "q4": q["q4"],
               "bug_flags": flags, "created_at": utc_now()}
        self._append_row(row)
        return row

    def record_reveal(self, eid: str, rater_id: str) -> dict:
        self._require_event(eid)
        state = self.stage_state(eid, rater_id)
        if not state["stage1"]:
            raise StageOrderViolation(
                f"reveal requires a stage1 submission by {rater_id} for {eid}")
        if state["revealed"]:
            return {"kind": "reveal", "event_id": eid, "rater_id": rater_id}
        row = {"kind": "reveal", "event_id": eid, "rater_id": rater_id,
               "created_at": utc_now()}
        self._append_row(row)
        return row

    def append_stage2(self, eid: str, rater_id: str, q5: int,
                      bug_flags: Iterable[str] = ()) -> dict:
        self._require_event(eid)
        _check_likert("q5", q5)
        flags = _check_flags(bug_flags)
        state = self.stage_state(eid, rater_id)
        if not state["revealed"]:
            raise StageOrderViolation(
                f"q5 requires the reveal to be recorded for {rater_id} on {eid}")
        if state["stage2"]:
            raise DuplicateStage(f"stage2 already submitted by {rater_id} for {eid}")
        row = {"kind": "stage2", "event_id": eid, "rater_id": rater_id,
               "q5": q5, "bug_flags": flags, "created_at": utc_now()}
        self._append_row(row)
        return row

    def append_annotation(self, annotation: Annotation) -> None:
        """Convenience wrapper used by batch tooling: replays both stages."""
        self.append_stage1(annotation.event_id, annotation.rater_id,
                           {"q1": annotation.q1, "q2": annotation.q2,
                            "q3": annotation.q3, "q4": annotation.q4},
                           annotation.bug_flags)
        if annotation.q5 is not None:
            self.record_reveal(annotation.event_id, annotation.rater_id)
            self.append_stage2(annotation.event_id, annotation.rater_id,
                               annotation.q5, annotation.bug_flags)

    def annotations(self) -> list[Annotation]:
        """Merged per-(event, rater) view of the staged rows."""
        merged: dict[tuple[str, str], dict] = {}
        order: list[tuple[str, str]] = []
        for row in self._annotation_rows():
            key = (row["event_id"], row["rater_id"])
            if key not in merged:
                merged[key] = {}
                order.append(key)
            slot = merged[key]
            if row["kind"] == "stage1":
                slot.update(q1=row["q1"], q2=row["q2"], q3=row["q3"], q4=row["q4"],
                            created_at=row["created_at"])
                slot["flags1"] = set(row.get("bug_flags", []))
            elif row["kind"] == "reveal":
                slot["revealed_at"] = row.get("created_at")
            elif row["kind"] == "stage2":
                slot.update(q5=row["q5"])
                slot["flags2"] = set(row.get("bug_flags", []))
        out = []
        for key in order:
            slot = merged[key]
            if "q1" not in slot:
                continue  # stage2 without stage1 cannot happen via the API
            out.append(Annotation(
                event_id=key[0], rater_id=key[1],
                q1=slot["q1"], q2=slot["q2"], q3=slot["q3"], q4=slot["q4"],
                q5=slot.get("q5"),
                bug_flags=slot.get("flags1", set()) | slot.get("flags2", set()),
                created_at=slot.get("created_at", ""),
                revealed_at=slot.get("revealed_at"),
            ))
        return out


def _check_flags(flags: Iterable[str]) -> list[str]:
    flags = sorted(set(flags))
    unknown = [f for f in flags if f not in BUG_FLAGS]
    if unknown:
        raise ValueError(f"unknown bug flags {unknown}")
    return flags
