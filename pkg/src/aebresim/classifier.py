"""Brake-event classification against a pseudo ground truth.

The pseudo ground truth pairs a hypothetical ego trajectory (constant
acceleration from the activation instant, following the observed path)
with the observed object trajectory.  An event is a true collision
prediction only if the minimum box distance in the pseudo ground truth
reaches zero while the observed data shows no overlap; every ambiguous
situation (observed overlap without documentation, truncated tracks,
exhausted paths) falls back to the false-prediction verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .aebs import AebsConfig, BrakeEvent, SnippetSample
from .geometry import MDSeries, trajectory_min_distance, wrap_angle_array

#: paths shorter than this are unusable for reparametrization (meters)
DEGENERATE_PATH_LENGTH = 0.01

#: slack when deciding that the demanded arc length exceeds the path,
#: so that exact reparametrization identities do not flag exhaustion
_EXHAUSTION_TOL = 1e-9


class Verdict(str, Enum):
    TCPR = "TCPr"
    FCPR = "FCPr"


class Reason(str, Enum):
    PSEUDO_COLLISION = "PseudoCollision"
    NO_PSEUDO_COLLISION = "NoPseudoCollision"
    OBSERVED_OVERLAP = "ObservedOverlap"
    TRACK_ENDED = "TrackEnded"


@dataclass
class Classification:
    verdict: Verdict
    reason: Reason
    needs_review: bool = False


@dataclass
class HypotheticalEgoTrajectory:
    """Constant-acceleration motion reparametrized along the observed path."""

    poses: list[tuple[float, float, float, float]]
    v0: float
    a0: float
    path_exhausted: bool
    exhausted_t: float | None  # first grid time whose demanded arc length exceeds the path
    degenerate_path: bool = False


@dataclass
class PseudoGroundTruth:
    hyp_ego: HypotheticalEgoTrajectory
    obj_observed: list[tuple[float, float, float, float]]
    md_pseudo: MDSeries
    md_observed: MDSeries
    t_eval: float


def hypothetical_ego(ego_snippet: list[SnippetSample], v0: float, a0: float,
                     cfg: AebsConfig) -> HypotheticalEgoTrajectory:
    """Reparametrize the observed ego path by hypothetical distance traveled.

    The path is the polyline of observed center positions; the demanded
    arc length is s(t) = v0 t + a0 t^2 / 2, clamped at the standstill
    distance for decelerating motion.  Positions are interpolated
    linearly and headings along the shortest arc at s(t).  Once s(t)
    exceeds the total observed path length the last observed pose is
    held and the trajectory is marked exhausted.
    """
    if len(ego_snippet) < 2:
        raise ValueError("need at least 2 observed poses")
    if v0 < 0:
        raise ValueError(f"v0 must be non-negative, got {v0}")
    pts = np.array([[s.x, s.y] for s in ego_snippet], dtype=float)
    psi_unwrapped = np.unwrap(np.array([s.psi for s in ego_snippet], dtype=float))
    seg = np.hypot(*np.diff(pts, axis=0).T)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = float(cum[-1])
    degenerate = total < DEGENERATE_PATH_LENGTH and v0 > 0.0

    t = np.arange(cfg.n_steps + 1) * cfg.dt
    if v0 <= 0.0:
        t_stop = 0.0 if a0 <= 0.0 else np.inf
    elif a0 < 0.0:
        t_stop = v0 / -a0
    else:
        t_stop = np.inf
    tc = np.minimum(t, t_stop)
    s = v0 * tc + 0.5 * a0 * tc * tc

    over = s > total + _EXHAUSTION_TOL
    exhausted = bool(over.any())
    exhausted_t = float(t[int(np.argmax(over))]) if exhausted else None
    s_capped = np.minimum(s, total)

    # drop zero-length segments so the arc-length parametrization is strict
    keep = np.concatenate(([True], seg > 0.0))
    cum_u, pts_u, psi_u = cum[keep], pts[keep], psi_unwrapped[keep]
    if len(cum_u) < 2:
        x = np.full_like(s_capped, pts[0, 0])
        y = np.full_like(s_capped, pts[0, 1])
        psi = np.full_like(s_capped, psi_unwrapped[0])
    else:
        x = np.interp(s_capped, cum_u, pts_u[:, 0])
        y = np.interp(s_capped, cum_u, pts_u[:, 1])
        psi = np.interp(s_capped, cum_u, psi_u)
    psi = wrap_angle_array(psi)

    poses = [(float(ti), float(xi), float(yi), float(pi))
             for ti, xi, yi, pi in zip(t, x, y, psi)]
    return HypotheticalEgoTrajectory(poses=poses, v0=v0, a0=a0,
                                     path_exhausted=exhausted, exhausted_t=exhausted_t,
                                     degenerate_path=degenerate)


def build_pseudo_ground_truth(event: BrakeEvent, cfg: AebsConfig) -> PseudoGroundTruth:
    """Pseudo ground truth for one brake event.

    (v0, a0) are the activation-time speed and longitudinal acceleration
    that entered the activation prediction, i.e. the first snippet
    sample, not a re-estimate.  Object observations are used as-is; both
    MD series share the snippet grid over the commonly observed span.
    """
    if not event.ego_snippet or not event.obj_snippet:
        raise ValueError(f"event {event.event_id}: empty snippet")
    first = event.ego_snippet[0]
    hyp = hypothetical_ego(event.ego_snippet, v0=first.v, a0=first.a, cfg=cfg)

    n = min(len(event.ego_snippet), len(event.obj_snippet))
    obj_poses = [(s.t, s.x, s.y, s.psi) for s in event.obj_snippet[:n]]
    ego_obs = [(s.t, s.x, s.y, s.psi) for s in event.ego_snippet[:n]]
    ego_dims = event.cpr.ego_pred.dims
    obj_dims = event.cpr.obj_pred.dims
    md_pseudo = trajectory_min_distance(hyp.poses[:n], ego_dims, obj_poses, obj_dims)
    md_observed = trajectory_min_distance(ego_obs, ego_dims, obj_poses, obj_dims)
    return PseudoGroundTruth(hyp_ego=hyp, obj_observed=obj_poses,
                             md_pseudo=md_pseudo, md_observed=md_observed,
                             t_eval=(n - 1) * cfg.dt)


def classify_event(event: BrakeEvent, pgt: PseudoGroundTruth) -> Classification:
    """Apply the divergence rule with its conservative fallbacks.

    TCPr requires pseudo contact before the observed path runs out and
    strictly positive observed minimum distance.  Observed overlaps
    without a documented real collision, truncated tracks and exhausted
    paths without contact are all classified FCPr.
    """
    review = pgt.hyp_ego.degenerate_path

    if pgt.md_observed.min_md == 0.0:
        # perception overlap; only a documented real collision exempts it
        # from review, the verdict stays FCPr either way
        return Classification(Verdict.FCPR, Reason.OBSERVED_OVERLAP,
                              needs_review=not event.documented_collision or review)

    first_contact = pgt.md_pseudo.first_zero_t()
    exhausted_t = pgt.hyp_ego.exhausted_t
    contact_valid = first_contact is not None and (
        exhausted_t is None or first_contact < exhausted_t)

    if (event.track_ended or pgt.hyp_ego.path_exhausted) and not contact_valid:
        return Classification(Verdict.FCPR, Reason.TRACK_ENDED, needs_review=True)
    if contact_valid:
        return Classification(Verdict.TCPR, Reason.PSEUDO_COLLISION, needs_review=review)
    return Classification(Verdict.FCPR, Reason.NO_PSEUDO_COLLISION, needs_review=review)
