"""Simplified AEB system replayed open-loop over a recording.

Four stages per frame and ego host: field-of-view object detection,
analytic unicycle trajectory prediction, collision detection on
predicted minimum box distance, and TTC-thresholded assessment with
persistence filtering.  Brake events are recorded, never fed back into
the trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .geometry import MDSeries, trajectory_min_distance, wrap_angle, wrap_angle_array
from .preprocess import (
    LOW_SPEED_THRESHOLD,
    KinematicState,
    PreparedRecording,
    PreprocessConfig,
    prepare_recording,
)
from .tracks import ParticipantClass, Recording

#: classes whose prediction reference point sits on the rear axle
TWO_AXLE_CLASSES = frozenset(
    {ParticipantClass.CAR, ParticipantClass.TRUCK_BUS, ParticipantClass.VAN}
)


class InterventionLevel(str, Enum):
    PARTIAL = "partial"
    EMERGENCY = "emergency"


@dataclass
class AebsConfig:
    fov_angle: float = math.radians(60.0)  # total opening angle
    fov_range: float = 200.0
    min_active_speed: float = 1.0
    horizon: float = 5.0
    dt: float = 0.04
    sideslip_limit: float = math.radians(12.0)
    oncoming_angle: float = math.radians(135.0)
    persistence_frames: int = 9
    ttc_partial: float = 1.6
    ttc_emergency: float = 0.6
    rear_axle_fraction: float = 0.85

    def __post_init__(self):
        if not (0.0 < self.ttc_emergency < self.ttc_partial <= self.horizon):
            raise ValueError(
                f"need 0 < ttc_emergency < ttc_partial <= horizon, got "
                f"{self.ttc_emergency}, {self.ttc_partial}, {self.horizon}")
        for name in ("fov_angle", "fov_range", "horizon", "dt", "rear_axle_fraction"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.persistence_frames < 1:
            raise ValueError("persistence_frames must be >= 1")

    @property
    def n_steps(self) -> int:
        return round(self.horizon / self.dt)


@dataclass
class PredictedTrajectory:
    """Poses (t, x, y, psi) on [0, horizon] at dt spacing, center-referenced."""

    poses: list[tuple[float, float, float, float]]
    dims: tuple[float, float]  # (length, width)
    reference: str = "center"

    def pose_array(self) -> np.ndarray:
        return np.asarray(self.poses, dtype=float)


@dataclass
class CollisionPrediction:
    ego_id: int
    object_id: int
    frame: int
    ego_pred: PredictedTrajectory
    obj_pred: PredictedTrajectory
    ttc: float
    md_pred: MDSeries


@dataclass(frozen=True)
class SnippetSample:
    """Observed state relative to activation: t = 0 at the activation frame."""

    t: float
    x: float
    y: float
    psi: float
    v: float
    a: float


@dataclass
class BrakeEvent:
    event_id: str
    dataset: str
    recording_id: str
    level: InterventionLevel
    cpr: CollisionPrediction
    ego_snippet: list[SnippetSample]
    obj_snippet: list[SnippetSample]
    track_ended: bool
    documented_collision: bool = False


def predict_trajectory(state: KinematicState, dims: tuple[float, float],
                       two_axle: bool, cfg: AebsConfig) -> PredictedTrajectory:
    """Analytic constant-acceleration, constant-turn-rate rollout.

    Per step the pose advances along an exact constant-curvature arc for
    the distance traveled within the step, including the partial step in
    which the speed reaches zero; from then on the pose is frozen.  For
    two-axle vehicles the integration runs at the rear axle (at
    ``rear_axle_fraction`` of the length behind the front bumper) and
    the returned poses are transformed back to the box center.
    """
    v0, a, omega = state.v, state.a, state.omega
    psi0 = state.psi
    x0, y0 = state.x, state.y
    offset = (cfg.rear_axle_fraction - 0.5) * dims[0] if two_axle else 0.0
    if offset:
        x0 -= offset * math.cos(psi0)
        y0 -= offset * math.sin(psi0)

    t = np.arange(cfg.n_steps + 1) * cfg.dt
    if v0 <= 0.0:
        t_stop = 0.0  # standstill is latched, even under positive acceleration
    elif a < 0.0:
        t_stop = v0 / -a
    else:
        t_stop = math.inf
    tc = np.minimum(t, t_stop)
    s = v0 * tc + 0.5 * a * tc * tc
    psi = psi0 + omega * tc

    ds = np.diff(s)
    dpsi = np.diff(psi)
    # chord of the within-step arc: length ds*sinc(dpsi/2), direction psi+dpsi/2
    chord = ds * np.sinc(dpsi / (2.0 * math.pi))
    mid = psi[:-1] + 0.5 * dpsi
    x = x0 + np.concatenate(([0.0], np.cumsum(chord * np.cos(mid))))
    y = y0 + np.concatenate(([0.0], np.cumsum(chord * np.sin(mid))))

    if offset:
        x = x + offset * np.cos(psi)
        y = y + offset * np.sin(psi)
    psi_out = wrap_angle_array(psi)
    poses = [(float(ti), float(xi), float(yi), float(pi))
             for ti, xi, yi, pi in zip(t, x, y, psi_out)]
    return PredictedTrajectory(poses=poses, dims=dims)


def detect_objects(ego: KinematicState, others: Iterable[tuple[int, object]],
                   cfg: AebsConfig) -> list[int]:
    """Ids whose center lies in the ego field of view.

    Empty when the ego moves slower than the activation speed.  The FoV
    apex sits at the ego bounding-box center; the opening angle is the
    total angle (half-angle each side of the heading).
    """
    if ego.v < cfg.min_active_speed:
        return []
    half = 0.5 * cfg.fov_angle
    out = []
    for oid, obj in others:
        dx, dy = obj.x - ego.x, obj.y - ego.y
        if math.hypot(dx, dy) > cfg.fov_range:
            continue
        if abs(wrap_angle(math.atan2(dy, dx) - ego.psi)) <= half:
            out.append(oid)
    return out


def is_oncoming(ego: KinematicState, obj: KinematicState, cfg: AebsConfig) -> bool:
    """Opposing-flow test comparing both velocity direction and heading."""
    if obj.v <= LOW_SPEED_THRESHOLD:
        return False
    vel_dir = wrap_angle(obj.psi + obj.beta)
    return (abs(wrap_angle(vel_dir - ego.psi)) > cfg.oncoming_angle
            and abs(wrap_angle(obj.psi - ego.psi)) > cfg.oncoming_angle)


def _max_travel(state: KinematicState, horizon: float) -> float:
    return state.v * horizon + max(state.a, 0.0) * 0.5 * horizon * horizon


def generate_cprs(
    ego_id: int,
    ego: KinematicState,
    ego_dims: tuple[float, float],
    objects: Iterable[tuple[int, KinematicState, tuple[float, float], ParticipantClass]],
    frame: int,
    cfg: AebsConfig,
    prediction_cache: dict | None = None,
) -> list[CollisionPrediction]:
    """Collision predictions for one ego against FoV-filtered objects.

    Objects with extreme sideslip and oncoming traffic are excluded; for
    the rest, a CPr is emitted whenever the predicted minimum box
    distance reaches zero within the horizon, with the TTC quantized to
    the first contact sample of the prediction grid.
    """
    ego_pred: PredictedTrajectory | None = None
    ego_diag = 0.5 * math.hypot(*ego_dims)
    out = []
    for oid, obj, dims, cls in objects:
        if abs(obj.beta) > cfg.sideslip_limit:
            continue
        if is_oncoming(ego, obj, cfg):
            continue
        # conservative reachability bound to skip hopeless pairs
        dist_now = math.hypot(obj.x - ego.x, obj.y - ego.y)
        reach = _max_travel(ego, cfg.horizon) + _max_travel(obj, cfg.horizon)
        if dist_now - reach > ego_diag + 0.5 * math.hypot(*dims):
            continue
        if ego_pred is None:
            ego_pred = predict_trajectory(ego, ego_dims, two_axle=True, cfg=cfg)
        obj_pred = None
        if prediction_cache is not None:
            obj_pred = prediction_cache.get(oid)
        if obj_pred is None:
            obj_pred = predict_trajectory(obj, dims, two_axle=cls in TWO_AXLE_CLASSES, cfg=cfg)
            if prediction_cache is not None:
                prediction_cache[oid] = obj_pred
        md = trajectory_min_distance(ego_pred.poses, ego_dims, obj_pred.poses, dims)
        ttc = md.first_zero_t()
        if ttc is None or ttc <= 0.0:
            # no predicted contact, or already overlapping at t=0 (not a prediction)
            continue
        out.append(CollisionPrediction(ego_id=ego_id, object_id=oid, frame=frame,
                                       ego_pred=ego_pred, obj_pred=obj_pred,
                                       ttc=float(ttc), md_pred=md))
    return out


def confirm_persistence(presence_frames: Iterable[int], persistence_frames: int) -> list[int]:
    """Frames at which a per-object CPr stream counts as confirmed.

    Confirmation requires presence in at least ``persistence_frames``
    consecutive frames; any gap resets the counter.  All frames from the
    first confirmation of a streak onward (while presence lasts) are
    confirmed.
    """
    confirmed = []
    streak = 0
    prev = None
    for f in presence_frames:
        if prev is not None and f <= prev:
            raise ValueError("presence stream must be strictly increasing")
        streak = streak + 1 if prev is not None and f == prev + 1 else 1
        prev = f
        if streak >= persistence_frames:
            confirmed.append(f)
    return confirmed


def assess(confirmed_stream: Iterable[tuple[int, float]], cfg: AebsConfig):
    """Per-frame intervention decisions plus rising-edge brake events.

    ``confirmed_stream`` holds (frame, ttc) pairs of one object's
    confirmed CPrs in frame order.  A new episode starts whenever the
    confirmed frames are non-consecutive.  Within an episode, a partial
    event fires at the first frame with ttc below the partial threshold
    and an emergency event at the first frame below the emergency
    threshold (at most one of each per episode).
    """
    decisions: dict[int, InterventionLevel | None] = {}
    events: list[tuple[int, InterventionLevel]] = []
    prev_frame = None
    partial_fired = emergency_fired = False
    for frame, ttc in confirmed_stream:
        if prev_frame is None or frame != prev_frame + 1:
            partial_fired = emergency_fired = False
        prev_frame = frame
        if ttc < cfg.ttc_emergency:
            decisions[frame] = InterventionLevel.EMERGENCY
        elif ttc < cfg.ttc_partial:
            decisions[frame] = InterventionLevel.PARTIAL
        else:
            decisions[frame] = None
        if ttc < cfg.ttc_partial and not partial_fired:
            partial_fired = True
            events.append((frame, InterventionLevel.PARTIAL))
        if ttc < cfg.ttc_emergency and not emergency_fired:
            emergency_fired = True
            events.append((frame, InterventionLevel.EMERGENCY))
    return decisions, events


@dataclass
class _PairState:
    streak: int = 0
    last_frame: int | None = None
    last_confirmed: int | None = None
    partial_fired: bool = False
    emergency_fired: bool = False


def _extract_snippet(track, start_frame: int, n_samples: int, dt: float) -> list[SnippetSample]:
    out = []
    for k in range(n_samples):
        st = track.state_at(start_frame + k)
        if st is None:
            break
        out.append(SnippetSample(t=k * dt, x=st.x, y=st.y, psi=st.psi, v=st.v, a=st.a))
    return out


def simulate_recording(
    rec: Recording | PreparedRecording,
    cfg: AebsConfig | None = None,
    dataset: str = "synthetic",
    documented_collisions: Iterable[str] = (),
    preprocess_cfg: PreprocessConfig | None = None,
) -> list[BrakeEvent]:
    """Replay the AEBS over every frame with every car as ego host.

    Open loop: the recording is never modified and system decisions do
    not alter any trajectory.  Events are returned sorted by
    (ego_id, frame, object_id, level).
    """
    from .store import event_id as stable_event_id

    cfg = cfg or AebsConfig()
    prepared = rec if isinstance(rec, PreparedRecording) else prepare_recording(rec, preprocess_cfg)
    if abs(cfg.dt * prepared.fps - 1.0) > 1e-9:
        raise ValueError(f"cfg.dt={cfg.dt} does not match recording fps={prepared.fps}")
    documented = set(documented_collisions)

    n_snippet = cfg.n_steps + 1
    pair_states: dict[tuple[int, int], _PairState] = {}
    events: list[BrakeEvent] = []

    if not prepared.tracks:
        return []
    lo = min(t.first_frame for t in prepared.tracks.values())
    hi = max(t.first_frame + len(t.samples) - 1 for t in prepared.tracks.values())

    for frame in range(lo, hi + 1):
        present = prepared.frame_index.get(frame, [])
        if len(present) < 2:
            continue
        states = {tid: prepared.tracks[tid].state_at(frame) for tid in present}
        obj_pred_cache: dict[int, PredictedTrajectory] = {}
        for ego_id in present:
            ego_track = prepared.tracks[ego_id]
            if ego_track.meta.cls is not ParticipantClass.CAR:
                continue
            ego = states[ego_id]
            others = [(tid, states[tid]) for tid in present if tid != ego_id]
            visible = set(detect_objects(ego, others, cfg))
            candidates = []
            for tid in present:
                if tid == ego_id or tid not in visible:
                    continue
                tr = prepared.tracks[tid]
                candidates.append((tid, states[tid], (tr.meta.length, tr.meta.width), tr.meta.cls))
            ego_dims = (ego_track.meta.length, ego_track.meta.width)
            cprs = generate_cprs(ego_id, ego, ego_dims, candidates, frame, cfg,
                                 prediction_cache=obj_pred_cache)
            cpr_by_obj = {c.object_id: c for c in cprs}

            for oid in sorted(cpr_by_obj):
                key = (ego_id, oid)
                st = pair_states.setdefault(key, _PairState())
                st.streak = st.streak + 1 if st.last_frame == frame - 1 else 1
                st.last_frame = frame
                if st.streak < cfg.persistence_frames:
                    continue
                # confirmed; new episode if the confirmed run was interrupted
                if st.last_confirmed != frame - 1:
                    st.partial_fired = st.emergency_fired = False
                st.last_confirmed = frame
                cpr = cpr_by_obj[oid]
                fired = []
                if cpr.ttc < cfg.ttc_partial and not st.partial_fired:
                    st.partial_fired = True
                    fired.append(InterventionLevel.PARTIAL)
                if cpr.ttc < cfg.ttc_emergency and not st.emergency_fired:
                    st.emergency_fired = True
                    fired.append(InterventionLevel.EMERGENCY)
                for level in fired:
                    ego_snippet = _extract_snippet(ego_track, frame, n_snippet, cfg.dt)
                    obj_snippet = _extract_snippet(prepared.tracks[oid], frame, n_snippet, cfg.dt)
                    truncated = len(ego_snippet) < n_snippet or len(obj_snippet) < n_snippet
                    eid = stable_event_id(dataset, prepared.recording_id, ego_id, oid,
                                          frame, level.value)
                    events.append(BrakeEvent(
                        event_id=eid,
                        dataset=dataset,
                        recording_id=prepared.recording_id,
                        level=level,
                        cpr=cpr,
                        ego_snippet=ego_snippet,
                        obj_snippet=obj_snippet,
                        track_ended=truncated,
                        documented_collision=eid in documented,
                    ))

    level_order = {InterventionLevel.PARTIAL: 0, InterventionLevel.EMERGENCY: 1}
    events.sort(key=lambda e: (e.cpr.ego_id, e.cpr.frame, e.cpr.object_id, level_order[e.level]))
    return events
