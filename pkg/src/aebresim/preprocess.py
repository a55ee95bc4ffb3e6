"""Kinematic preprocessing of raw track samples.

Derives heading (when the input lacks it), turn rate, signed
longitudinal acceleration and sideslip, applies cubic smoothing-spline
filtering to estimated headings, and fills default bounding-box
dimensions for vulnerable road users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solveh_banded

from .errors import MissingDimension, SeriesTooShort
from .geometry import wrap_angle, wrap_angle_array
from .tracks import VRU_CLASSES, ParticipantClass, ParticipantMeta, Recording, TrackSample

#: speed at or below which velocity direction is unreliable; also the
#: AEBS activation threshold, kept as one constant on purpose
LOW_SPEED_THRESHOLD = 1.0

#: default roughness penalty of the heading smoother (rad^2 s^3); chosen
#: so linear ramps pass through unchanged while single-sample spikes at
#: 25 Hz are attenuated by more than 80%
SPLINE_SMOOTHING = 1e-3

VRU_MIN_WIDTH = 0.6
VRU_DEFAULT_LENGTH = {
    ParticipantClass.MOTORCYCLE: 1.5,
    ParticipantClass.BICYCLE: 1.5,
    ParticipantClass.PEDESTRIAN: 0.6,
}


@dataclass(frozen=True)
class KinematicState:
    """Unicycle-style state of one participant at one frame."""

    x: float
    y: float
    psi: float
    v: float
    omega: float
    a: float
    beta: float


@dataclass
class HeadingEstimate:
    heading: np.ndarray
    all_low_speed: bool = False


def derive_heading(samples: list[TrackSample],
                   low_speed_threshold: float = LOW_SPEED_THRESHOLD) -> HeadingEstimate:
    """Estimate heading from velocity components.

    Where speed exceeds the threshold the heading is atan2(vy, vx).
    Contiguous low-speed runs are interpolated on the circle along the
    shortest arc between the nearest valid neighbors; leading/trailing
    runs copy the nearest valid heading.  A track that never exceeds the
    threshold gets heading 0 everywhere and the ``all_low_speed`` flag.
    """
    vx = np.array([s.vx for s in samples])
    vy = np.array([s.vy for s in samples])
    speed = np.hypot(vx, vy)
    valid = speed > low_speed_threshold
    heading = np.zeros(len(samples))
    if not valid.any():
        return HeadingEstimate(heading=heading, all_low_speed=True)

    heading[valid] = np.arctan2(vy[valid], vx[valid])
    idx = np.flatnonzero(valid)
    first, last = idx[0], idx[-1]
    heading[:first] = heading[first]
    heading[last + 1:] = heading[last]
    for left, right in zip(idx, idx[1:]):
        if right == left + 1:
            continue
        # shortest arc; wrap_angle maps an exact pi difference to +pi,
        # which breaks antipodal ties toward positive rotation
        delta = wrap_angle(heading[right] - heading[left])
        span = right - left
        for k in range(left + 1, right):
            heading[k] = wrap_angle(heading[left] + delta * (k - left) / span)
    return HeadingEstimate(heading=heading)


def _natural_spline_roughness(t: np.ndarray):
    """Second-difference operator and its weight matrix for knots ``t``."""
    h = np.diff(t)
    n = len(t)
    delta = np.zeros((n - 2, n))
    for i in range(n - 2):
        delta[i, i] = 1.0 / h[i]
        delta[i, i + 1] = -(1.0 / h[i] + 1.0 / h[i + 1])
        delta[i, i + 2] = 1.0 / h[i + 1]
    w = np.zeros((n - 2, n - 2))
    for i in range(n - 2):
        w[i, i] = (h[i] + h[i + 1]) / 3.0
        if i + 1 < n - 2:
            w[i, i + 1] = w[i + 1, i] = h[i + 1] / 6.0
    return delta, w


def smooth_heading(series, fps: float, smoothing: float = SPLINE_SMOOTHING) -> np.ndarray:
    """Cubic smoothing spline on the unwrapped heading series.

    Minimizes sum (y_i - f(t_i))^2 + smoothing * integral f''^2 over
    natural cubic splines (Reinsch 1967) and returns the fitted values
    at the original sample times, re-wrapped to (-pi, pi].  Linear ramps
    (zero curvature) are reproduced exactly for any smoothing weight.
    """
    y = np.unwrap(np.asarray(series, dtype=float))
    n = len(y)
    if n < 4:
        raise SeriesTooShort(f"need at least 4 samples to smooth, got {n}")
    if smoothing <= 0.0:
        return wrap_angle_array(y)
    t = np.arange(n) / fps
    delta, w = _natural_spline_roughness(t)
    # Reinsch: solve (W + lam * D D^T) g = D y, then f = y - lam * D^T g
    a = w + smoothing * (delta @ delta.T)
    # symmetric positive definite banded with two superdiagonals
    ab = np.zeros((3, n - 2))
    ab[2] = np.diag(a)
    ab[1, 1:] = np.diag(a, 1)
    ab[0, 2:] = np.diag(a, 2)
    g = solveh_banded(ab, delta @ y, lower=False)
    fitted = y - smoothing * (delta.T @ g)
    return wrap_angle_array(fitted)


def derive_kinematics(samples: list[TrackSample], headings, fps: float,
                      low_speed_threshold: float = LOW_SPEED_THRESHOLD) -> list[KinematicState]:
    """Build per-frame unicycle states from samples and a heading series.

    Turn rate is the central-difference gradient of the unwrapped
    heading (one-sided at the ends); longitudinal acceleration is the
    acceleration vector projected onto the heading; sideslip is the
    wrapped angle from heading to velocity, forced to 0 at low speed.
    """
    psi = np.asarray(headings, dtype=float)
    if len(psi) != len(samples):
        raise ValueError(f"{len(psi)} headings for {len(samples)} samples")
    unwrapped = np.unwrap(psi)
    if len(samples) > 1:
        omega = np.gradient(unwrapped) * fps
    else:
        omega = np.zeros(1)
    out = []
    for i, s in enumerate(samples):
        v = math.hypot(s.vx, s.vy)
        p = wrap_angle(psi[i])
        a = s.ax * math.cos(p) + s.ay * math.sin(p)
        beta = wrap_angle(math.atan2(s.vy, s.vx) - p) if v > low_speed_threshold else 0.0
        out.append(KinematicState(x=s.x, y=s.y, psi=p, v=v, omega=float(omega[i]),
                                  a=a, beta=beta))
    return out


def apply_default_dimensions(meta: ParticipantMeta) -> ParticipantMeta:
    """Fill missing VRU dimensions; error on missing non-VRU dimensions.

    VRU widths are floored at 0.6 m; missing VRU lengths default to
    1.5 m for motorcycles and bicycles and 0.6 m for pedestrians.
    """
    if meta.cls in VRU_CLASSES:
        width = max(meta.width or 0.0, VRU_MIN_WIDTH)
        length = meta.length if meta.length else VRU_DEFAULT_LENGTH[meta.cls]
        return replace(meta, width=width, length=length)
    if meta.width is None or meta.length is None:
        raise MissingDimension(
            f"track {meta.track_id}: {meta.cls.value} without width/length")
    return meta


@dataclass
class PreprocessConfig:
    low_speed_threshold: float = LOW_SPEED_THRESHOLD
    spline_smoothing: float = SPLINE_SMOOTHING
    force_smoothing: bool = False  # smooth recorded headings too


@dataclass
class PreparedTrack:
    meta: ParticipantMeta  # dimensions guaranteed present
    samples: list[TrackSample]
    states: list[KinematicState]
    heading_flagged: bool = False  # all-low-speed fallback was used

    @property
    def first_frame(self) -> int:
        return self.samples[0].frame

    def state_at(self, frame: int) -> KinematicState | None:
        i = frame - self.first_frame
        if 0 <= i < len(self.states):
            return self.states[i]
        return None


@dataclass
class PreparedRecording:
    recording_id: str
    fps: float
    tracks: dict[int, PreparedTrack]
    frame_index: dict[int, list[int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.frame_index:
            for tid, track in self.tracks.items():
                for s in track.samples:
                    self.frame_index.setdefault(s.frame, []).append(tid)
            for tids in self.frame_index.values():
                tids.sort()


def prepare_recording(rec: Recording, cfg: PreprocessConfig | None = None) -> PreparedRecording:
    """Derive headings and kinematics for every track of a recording.

    Headings are estimated from velocities (and spline-smoothed) only
    when the recording does not carry them, unless ``force_smoothing``
    is set.
    """
    cfg = cfg or PreprocessConfig()
    out: dict[int, PreparedTrack] = {}
    for tid, track in rec.tracks.items():
        flagged = False
        if rec.has_heading:
            headings = np.array([s.heading for s in track.samples], dtype=float)
            if cfg.force_smoothing and len(headings) >= 4:
                headings = smooth_heading(headings, rec.fps, cfg.spline_smoothing)
        else:
            est = derive_heading(track.samples, cfg.low_speed_threshold)
            flagged = est.all_low_speed
            headings = est.heading
            if len(headings) >= 4:
                headings = smooth_heading(headings, rec.fps, cfg.spline_smoothing)
        states = derive_kinematics(track.samples, headings, rec.fps, cfg.low_speed_threshold)
        meta = apply_default_dimensions(track.meta)
        out[tid] = PreparedTrack(meta=meta, samples=track.samples, states=states,
                                 heading_flagged=flagged)
    return PreparedRecording(recording_id=rec.recording_id, fps=rec.fps, tracks=out)
