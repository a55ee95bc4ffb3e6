"""Oriented-bounding-box geometry in the 2D world frame.

Boxes are rectangles described by center, heading and (length, width),
with length along the heading axis.  Minimum distance between two boxes
is exact: zero iff the closed rectangles intersect or touch, otherwise
the smallest vertex-to-edge distance between the two boundaries.
Distances along trajectories are evaluated per sampled timestep only;
tunneling between steps at extreme speeds is accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatch

TAU = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    return math.pi - (math.pi - a) % TAU


def wrap_angle_array(a: np.ndarray) -> np.ndarray:
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), TAU)


@dataclass(frozen=True)
class OrientedBox:
    cx: float
    cy: float
    psi: float
    length: float
    width: float

    def __post_init__(self):
        if not (self.length > 0.0 and self.width > 0.0):
            raise ValueError(f"box dimensions must be positive, got {self.length}x{self.width}")


@dataclass
class MDSeries:
    """Per-timestep minimum distance between two participants.

    ``min_md`` is the series minimum and ``argmin_t`` the earliest time
    attaining it.
    """

    t: list[float]
    md: list[float]
    min_md: float = field(init=False)
    argmin_t: float = field(init=False)

    def __post_init__(self):
        if len(self.t) != len(self.md):
            raise LengthMismatch(f"{len(self.t)} times vs {len(self.md)} distances")
        if not self.md:
            raise ValueError("empty MD series")
        i = int(np.argmin(self.md))
        self.min_md = float(self.md[i])
        self.argmin_t = float(self.t[i])

    def first_zero_t(self) -> float | None:
        """Earliest time with md == 0, or None if no contact."""
        for ti, di in zip(self.t, self.md):
            if di == 0.0:
                return ti
        return None


def obb_corners(b: OrientedBox) -> list[tuple[float, float]]:
    """Corners of the rectangle, counterclockwise starting front-left."""
    c, s = math.cos(b.psi), math.sin(b.psi)
    hl, hw = 0.5 * b.length, 0.5 * b.width
    out = []
    for lx, ly in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
        out.append((b.cx + c * lx - s * ly, b.cy + s * lx + c * ly))
    return out


def _project_gap(corners_a, corners_b, ax: float, ay: float) -> float:
    """Signed separation of the two corner sets along one axis (>0 means disjoint)."""
    pa = [c[0] * ax + c[1] * ay for c in corners_a]
    pb = [c[0] * ax + c[1] * ay for c in corners_b]
    return max(min(pb) - max(pa), min(pa) - max(pb))


def overlap(a: OrientedBox, b: OrientedBox) -> bool:
    """Separating-axis test; touching boundaries count as overlap."""
    ca, cb = obb_corners(a), obb_corners(b)
    for box in (a, b):
        c, s = math.cos(box.psi), math.sin(box.psi)
        for ax, ay in ((c, s), (-s, c)):
            if _project_gap(ca, cb, ax, ay) > 0.0:
                return False
    return True


def _point_segment_distance(px, py, x0, y0, x1, y1) -> float:
    dx, dy = x1 - x0, y1 - y0
    denom = dx * dx + dy * dy
    t = ((px - x0) * dx + (py - y0) * dy) / denom
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    ex, ey = px - (x0 + t * dx), py - (y0 + t * dy)
    return math.hypot(ex, ey)


def min_distance(a: OrientedBox, b: OrientedBox) -> float:
    """Exact Euclidean minimum distance between the two closed rectangles.

    Zero iff the rectangles intersect or touch.  For disjoint convex
    polygons the minimum is attained at a vertex of one against an edge
    of the other, so it suffices to scan all 32 vertex/edge pairs.
    """
    if overlap(a, b):
        return 0.0
    ca, cb = obb_corners(a), obb_corners(b)
    best = math.inf
    for corners, other in ((ca, cb), (cb, ca)):
        for px, py in corners:
            for i in range(4):
                x0, y0 = other[i]
                x1, y1 = other[(i + 1) % 4]
                d = _point_segment_distance(px, py, x0, y0, x1, y1)
                if d < best:
                    best = d
    return best


# --- vectorized path used for per-timestep series -----------------------

def _corners_batch(poses: np.ndarray, length: float, width: float) -> np.ndarray:
    """(N,3) poses [x, y, psi] -> (N,4,2) corner coordinates."""
    x, y, psi = poses[:, 0], poses[:, 1], poses[:, 2]
    c, s = np.cos(psi), np.sin(psi)
    hl, hw = 0.5 * length, 0.5 * width
    local = np.array([(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)])
    cx = c[:, None] * local[:, 0] - s[:, None] * local[:, 1]
    cy = s[:, None] * local[:, 0] + c[:, None] * local[:, 1]
    return np.stack([x[:, None] + cx, y[:, None] + cy], axis=-1)


def _overlap_batch(pa: np.ndarray, pb: np.ndarray, psi_a: np.ndarray, psi_b: np.ndarray) -> np.ndarray:
    """SAT on (N,4,2) corner batches; returns (N,) bool."""
    separated = np.zeros(pa.shape[0], dtype=bool)
    for psi in (psi_a, psi_b):
        c, s = np.cos(psi), np.sin(psi)
        for ax, ay in ((c, s), (-s, c)):
            da = pa[..., 0] * ax[:, None] + pa[..., 1] * ay[:, None]
            db = pb[..., 0] * ax[:, None] + pb[..., 1] * ay[:, None]
            gap = np.maximum(db.min(axis=1) - da.max(axis=1), da.min(axis=1) - db.max(axis=1))
            separated |= gap > 0.0
    return ~separated


def _point_segment_batch(points: np.ndarray, seg0: np.ndarray, seg1: np.ndarray) -> np.ndarray:
    """(N,4,2) points vs (N,4,2)+(N,4,2) segments -> (N,4,4) distances."""
    p = points[:, :, None, :]
    s0 = seg0[:, None, :, :]
    d = (seg1 - seg0)[:, None, :, :]
    denom = (d * d).sum(axis=-1)
    t = ((p - s0) * d).sum(axis=-1) / denom
    t = np.clip(t, 0.0, 1.0)
    e = p - (s0 + t[..., None] * d)
    return np.sqrt((e * e).sum(axis=-1))


def batch_min_distance(
    poses_a: np.ndarray,
    dims_a: tuple[float, float],
    poses_b: np.ndarray,
    dims_b: tuple[float, float],
) -> np.ndarray:
    """Minimum box distance at each of N aligned timesteps; returns (N,)."""
    poses_a = np.asarray(poses_a, dtype=float)
    poses_b = np.asarray(poses_b, dtype=float)
    if poses_a.shape != poses_b.shape:
        raise LengthMismatch(f"{poses_a.shape} vs {poses_b.shape}")
    ca = _corners_batch(poses_a, *dims_a)
    cb = _corners_batch(poses_b, *dims_b)
    inside = _overlap_batch(ca, cb, poses_a[:, 2], poses_b[:, 2])
    sa0, sa1 = ca, np.roll(ca, -1, axis=1)
    sb0, sb1 = cb, np.roll(cb, -1, axis=1)
    d_ab = _point_segment_batch(ca, sb0, sb1).reshape(len(ca), -1)
    d_ba = _point_segment_batch(cb, sa0, sa1).reshape(len(ca), -1)
    d = np.minimum(d_ab.min(axis=1), d_ba.min(axis=1))
    d[inside] = 0.0
    return d


def trajectory_min_distance(
    poses_a,
    dims_a: tuple[float, float],
    poses_b,
    dims_b: tuple[float, float],
) -> MDSeries:
    """MD series along two pose lists sampled at identical times.

    Pose rows are (t, x, y, psi); both lists must share their time grid.
    """
    a = np.asarray(poses_a, dtype=float)
    b = np.asarray(poses_b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[1] != 4:
        raise LengthMismatch(f"pose arrays {a.shape} vs {b.shape}")
    if not np.array_equal(a[:, 0], b[:, 0]):
        raise LengthMismatch("pose lists are not on a common time grid")
    md = batch_min_distance(a[:, 1:4], dims_a, b[:, 1:4], dims_b)
    return MDSeries(t=[float(x) for x in a[:, 0]], md=[float(x) for x in md])
