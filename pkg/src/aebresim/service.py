"""HTTP annotation service enforcing the blinded two-stage protocol.

Stage 1 (replay + Q1..Q4) exposes observed data only.  The reveal
payload (predictions, pseudo ground truth, verdict) unlocks per rater
only after that rater's stage-1 submission, and Q5 is accepted only
after the reveal was fetched.  Staging state is derived from the
append-only annotation log, so restarts preserve blinding.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .errors import DuplicateStage, StageOrderViolation, UnknownEvent
from .metrics import build_agreement_report
from .store import BUG_FLAGS, EventStore, PgtSummary, classification_to_json

API_VERSION = 1


class Stage1Body(BaseModel):
    q1: int = Field(ge=1, le=5)
    q2: int = Field(ge=1, le=5)
    q3: int = Field(ge=1, le=5)
    q4: int = Field(ge=1, le=5)
    bug_flags: list[str] = []


class Stage2Body(BaseModel):
    q5: int = Field(ge=1, le=5)
    bug_flags: list[str] = []


def _event_summary(e) -> dict:
    # stage-1 safe: observed facts only, no prediction/pseudo/verdict keys
    return {
        "event_id": e.event_id,
        "dataset": e.dataset,
        "recording_id": e.recording_id,
        "level": e.level.value,
        "frame": e.cpr.frame,
        "ego_id": e.cpr.ego_id,
        "object_id": e.cpr.object_id,
        "track_ended": e.track_ended,
    }


def _reveal_payload(event, cls, pgt: PgtSummary) -> dict:
    return {
        "event_id": event.event_id,
        "classification": classification_to_json(cls),
        "prediction": {
            "ttc": event.cpr.ttc,
            "ego_poses": [list(p) for p in event.cpr.ego_pred.poses],
            "ego_dims": list(event.cpr.ego_pred.dims),
            "obj_poses": [list(p) for p in event.cpr.obj_pred.poses],
            "obj_dims": list(event.cpr.obj_pred.dims),
            "md_pred": {"t": event.cpr.md_pred.t, "md": event.cpr.md_pred.md},
        },
        "pseudo": {
            "v0": pgt.v0,
            "a0": pgt.a0,
            "path_exhausted": pgt.path_exhausted,
            "degenerate_path": pgt.degenerate_path,
            "t_eval": pgt.t_eval,
            "hyp_ego_poses": [list(p) for p in pgt.hyp_poses],
            "md_pseudo": {"t": pgt.md_pseudo.t, "md": pgt.md_pseudo.md},
            "md_observed": {"t": pgt.md_observed.t, "md": pgt.md_observed.md},
        },
    }


def create_app(store: EventStore, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="aebresim annotation service", version=str(API_VERSION))
    events = store.load_events()
    classifications = store.load_classifications()
    replays = store.load_replays()

    def _event_or_404(eid: str):
        e = events.get(eid)
        if e is None:
            raise HTTPException(status_code=404, detail=f"unknown event {eid}")
        return e

    @app.get("/api/events")
    def list_events():
        return {"api_version": API_VERSION,
                "events": [_event_summary(events[eid]) for eid in sorted(events)]}

    @app.get("/api/events/{eid}/replay")
    def get_replay(eid: str):
        _event_or_404(eid)
        payload = replays.get(eid)
        if payload is None:
            raise HTTPException(status_code=404, detail=f"no replay for event {eid}")
        return payload

    @app.get("/api/events/{eid}/raters/{rater}/state")
    def get_state(eid: str, rater: str):
        _event_or_404(eid)
        return store.stage_state(eid, rater)

    @app.post("/api/events/{eid}/raters/{rater}/stage1", status_code=201)
    def post_stage1(eid: str, rater: str, body: Stage1Body):
        _event_or_404(eid)
        _check_flags_http(body.bug_flags)
        try:
            store.append_stage1(eid, rater,
                                {"q1": body.q1, "q2": body.q2, "q3": body.q3, "q4": body.q4},
                                body.bug_flags)
        except DuplicateStage as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except UnknownEvent as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        return {"status": "stored", "stage": "stage1"}

    @app.get("/api/events/{eid}/raters/{rater}/reveal")
    def get_reveal(eid: str, rater: str):
        event = _event_or_404(eid)
        try:
            store.record_reveal(eid, rater)
        except StageOrderViolation as exc:
            raise HTTPException(status_code=403, detail=str(exc)) from None
        except UnknownEvent as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        pair = classifications.get(eid)
        if pair is None:
            raise HTTPException(status_code=404, detail=f"event {eid} is not classified yet")
        return _reveal_payload(event, pair[0], pair[1])

    @app.post("/api/events/{eid}/raters/{rater}/stage2", status_code=201)
    def post_stage2(eid: str, rater: str, body: Stage2Body):
        _event_or_404(eid)
        _check_flags_http(body.bug_flags)
        try:
            store.append_stage2(eid, rater, body.q5, body.bug_flags)
        except StageOrderViolation as exc:
            raise HTTPException(status_code=403, detail=str(exc)) from None
        except DuplicateStage as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except UnknownEvent as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        return {"status": "stored", "stage": "stage2"}

    @app.get("/api/report")
    def get_report():
        return build_agreement_report(
            store.annotations(),
            {eid: cls for eid, (cls, _) in classifications.items()})

    static_dir = Path(static_dir) if static_dir else Path(__file__).parent / "static"
    if static_dir.is_dir() and (static_dir / "index.html").exists():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index():
            return ("<html><body><h1>aebresim annotation service</h1>"
                    "<p>No UI bundle installed; the JSON API lives under /api.</p>"
                    "</body></html>")
    return app


def _check_flags_http(flags: list[str]) -> None:
    unknown = [f for f in flags if f not in BUG_FLAGS]
    if unknown:
        raise HTTPException(status_code=422,
                            detail=f"unknown bug flags {unknown}; valid: {list(BUG_FLAGS)}")


def serve_annotation_api(store: EventStore, host: str = "127.0.0.1", port: int = 8000,
                         static_dir: str | Path | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(store, static_dir), host=host, port=port, log_level="warning")
