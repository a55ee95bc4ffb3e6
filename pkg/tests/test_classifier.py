import math

import numpy as np
import pytest

from aebresim.aebs import (
    AebsConfig,
    BrakeEvent,
    CollisionPrediction,
    InterventionLevel,
    PredictedTrajectory,
    SnippetSample,
)
from aebresim.classifier import (
    Reason,
    Verdict,
    build_pseudo_ground_truth,
    classify_event,
    hypothetical_ego,
)
from aebresim.geometry import MDSeries

CFG = AebsConfig()
CAR = (4.5, 1.8)


def straight_snippet(v0: float, a: float, n: int | None = None,
                     x0: float = 0.0, y0: float = 0.0, hold_speed: float = 0.0,
                     brake_from: float = 0.0):
    """Straight-line observation: coast at v0, brake at ``brake_from`` seconds."""
    n = CFG.n_steps + 1 if n is None else n
    out = []
    x, v = x0, v0
    for k in range(n):
        ak = a if (k * CFG.dt >= brake_from and v > hold_speed) else 0.0
        out.append(SnippetSample(t=k * CFG.dt, x=x, y=y0, psi=0.0, v=v, a=ak))
        v_next = max(hold_speed, v + ak * CFG.dt)
        if ak < 0.0 and v + ak * CFG.dt < hold_speed:
            x += (v * v - hold_speed * hold_speed) / (2.0 * -ak)
        else:
            x += v * CFG.dt + 0.5 * ak * CFG.dt * CFG.dt
        v = v_next
    return out


def stationary_snippet(x: float, y: float = 0.0, n: int | None = None):
    n = CFG.n_steps + 1 if n is None else n
    return [SnippetSample(t=k * CFG.dt, x=x, y=y, psi=0.0, v=0.0, a=0.0)
            for k in range(n)]


def make_event(ego_snippet, obj_snippet, ego_dims=CAR, obj_dims=CAR,
               documented=False, track_ended=None) -> BrakeEvent:
    n_full = CFG.n_steps + 1
    if track_ended is None:
        track_ended = len(ego_snippet) < n_full or len(obj_snippet) < n_full
    poses = [(0.0, ego_snippet[0].x, ego_snippet[0].y, ego_snippet[0].psi)]
    cpr = CollisionPrediction(
        ego_id=1, object_id=2, frame=0,
        ego_pred=PredictedTrajectory(poses=poses, dims=ego_dims),
        obj_pred=PredictedTrajectory(poses=poses, dims=obj_dims),
        ttc=1.0, md_pred=MDSeries(t=[0.0], md=[0.0]))
    return BrakeEvent(event_id="test", dataset="t", recording_id="r",
                      level=InterventionLevel.PARTIAL, cpr=cpr,
                      ego_snippet=ego_snippet, obj_snippet=obj_snippet,
                      track_ended=track_ended, documented_collision=documented)


class TestHypotheticalEgo:
    def test_reparametrization_identity(self):
        snippet = straight_snippet(v0=10.0, a=0.0)
        hyp = hypothetical_ego(snippet, v0=10.0, a0=0.0, cfg=CFG)
        assert not hyp.path_exhausted
        for pose, obs in zip(hyp.poses, snippet):
            assert math.hypot(pose[1] - obs.x, pose[2] - obs.y) < 1e-3
            assert pose[3] == pytest.approx(obs.psi, abs=1e-9)

    def test_path_exhaustion_when_driver_stopped(self):
        # driver braked to a stop after 20 m; hypothetical keeps 10 m/s
        snippet = straight_snippet(v0=10.0, a=-2.5)  # stops after exactly 20 m
        hyp = hypothetical_ego(snippet, v0=10.0, a0=0.0, cfg=CFG)
        assert hyp.path_exhausted
        assert hyp.exhausted_t == pytest.approx(2.0, abs=CFG.dt + 1e-9)
        assert hyp.poses[-1][1] == pytest.approx(20.0, abs=1e-6)

    def test_standstill_clamps_arc_length(self):
        # long observed path, but the hypothetical brakes at -8 from 10 m/s
        snippet = straight_snippet(v0=10.0, a=0.0)
        hyp = hypothetical_ego(snippet, v0=10.0, a0=-8.0, cfg=CFG)
        assert not hyp.path_exhausted
        assert hyp.poses[-1][1] == pytest.approx(100.0 / 16.0, abs=1e-9)

    def test_arc_length_monotone(self):
        snippet = straight_snippet(v0=12.0, a=-3.0)
        hyp = hypothetical_ego(snippet, v0=12.0, a0=1.0, cfg=CFG)
        xs = [p[1] for p in hyp.poses]
        assert all(b >= a - 1e-12 for a, b in zip(xs, xs[1:]))

    def test_poses_lie_on_path(self):
        # curved observed path: quarter circle
        n = CFG.n_steps + 1
        radius = 30.0
        snippet = []
        for k in range(n):
            ang = 0.4 * k * CFG.dt
            snippet.append(SnippetSample(
                t=k * CFG.dt, x=radius * math.sin(ang), y=radius * (1 - math.cos(ang)),
                psi=ang, v=radius * 0.4, a=0.0))
        hyp = hypothetical_ego(snippet, v0=6.0, a0=0.0, cfg=CFG)
        for _, x, y, _ in hyp.poses:
            r = math.hypot(x, y - radius)
            assert abs(r - radius) < 0.01  # chordal sag stays below 1 cm

    def test_degenerate_path_flagged(self):
        snippet = stationary_snippet(x=0.0)
        hyp = hypothetical_ego(snippet, v0=5.0, a0=0.0, cfg=CFG)
        assert hyp.degenerate_path

    def test_determinism(self):
        snippet = straight_snippet(v0=9.0, a=-1.0)
        a = hypothetical_ego(snippet, v0=9.0, a0=-0.5, cfg=CFG)
        b = hypothetical_ego(snippet, v0=9.0, a0=-0.5, cfg=CFG)
        assert a == b


class TestBuildPgt:
    def test_t_eval_truncated_by_object(self):
        ego = straight_snippet(v0=10.0, a=0.0)
        obj = stationary_snippet(x=100.0, n=51)  # 2 s of object data
        pgt = build_pseudo_ground_truth(make_event(ego, obj), CFG)
        assert pgt.t_eval == pytest.approx(2.0)
        assert len(pgt.md_pseudo.md) == 51
        assert len(pgt.md_observed.md) == 51

    def test_stationary_object_in_path_hits(self):
        # driver brakes and stops short, object parked ahead but departing
        # never happens: pseudo contact iff hypothetical reaches the box
        ego = straight_snippet(v0=10.0, a=0.0)
        obj = stationary_snippet(x=30.0 + CAR[0])
        pgt = build_pseudo_ground_truth(make_event(ego, obj), CFG)
        assert pgt.md_pseudo.min_md == 0.0
        assert pgt.md_pseudo.first_zero_t() == pytest.approx(3.0, abs=CFG.dt)

    def test_uses_activation_state_not_reestimate(self):
        ego = straight_snippet(v0=10.0, a=0.0)
        obj = stationary_snippet(x=200.0)
        pgt = build_pseudo_ground_truth(make_event(ego, obj), CFG)
        assert pgt.hyp_ego.v0 == ego[0].v
        assert pgt.hyp_ego.a0 == ego[0].a


class TestClassify:
    def test_pseudo_contact_and_clear_observation_is_tcpr(self):
        # driver brakes to 4 m/s behind a 6 m/s lead; inattentive ego would hit
        ego = straight_snippet(v0=12.0, a=-5.0, hold_speed=4.0, brake_from=0.4)
        obj = straight_snippet(v0=6.0, a=0.0, x0=10.0 + CAR[0])
        event = make_event(ego, obj)
        pgt = build_pseudo_ground_truth(event, CFG)
        cls = classify_event(event, pgt)
        assert pgt.md_observed.min_md > 0.0
        assert pgt.md_pseudo.min_md == 0.0
        assert cls.verdict is Verdict.TCPR
        assert cls.reason is Reason.PSEUDO_COLLISION
        assert not cls.needs_review

    def test_no_pseudo_contact_is_fcpr(self):
        ego = straight_snippet(v0=10.0, a=0.0)
        obj = stationary_snippet(x=30.0, y=8.0)  # passes well clear
        event = make_event(ego, obj)
        cls = classify_event(event, build_pseudo_ground_truth(event, CFG))
        assert cls.verdict is Verdict.FCPR
        assert cls.reason is Reason.NO_PSEUDO_COLLISION

    def test_observed_overlap_forces_fcpr_with_review(self):
        ego = straight_snippet(v0=10.0, a=-8.0)
        obj = stationary_snippet(x=5.0)  # overlaps the braking ego
        event = make_event(ego, obj)
        pgt = build_pseudo_ground_truth(event, CFG)
        assert pgt.md_observed.min_md == 0.0
        cls = classify_event(event, pgt)
        assert cls.verdict is Verdict.FCPR
        assert cls.reason is Reason.OBSERVED_OVERLAP
        assert cls.needs_review

    def test_documented_collision_not_flagged_but_still_fcpr(self):
        ego = straight_snippet(v0=10.0, a=-8.0)
        obj = stationary_snippet(x=5.0)
        event = make_event(ego, obj, documented=True)
        cls = classify_event(event, build_pseudo_ground_truth(event, CFG))
        assert cls.verdict is Verdict.FCPR
        assert cls.reason is Reason.OBSERVED_OVERLAP
        assert not cls.needs_review

    def test_track_ended_without_contact_is_conservative(self):
        ego = straight_snippet(v0=10.0, a=0.0, n=40)
        obj = stationary_snippet(x=60.0 + CAR[0], n=40)  # contact would be at 6 s
        event = make_event(ego, obj)
        assert event.track_ended
        cls = classify_event(event, build_pseudo_ground_truth(event, CFG))
        assert cls.verdict is Verdict.FCPR
        assert cls.reason is Reason.TRACK_ENDED
        assert cls.needs_review

    def test_track_ended_with_contact_still_tcpr(self):
        ego = straight_snippet(v0=12.0, a=-5.0, hold_speed=4.0, brake_from=0.4, n=80)
        obj = straight_snippet(v0=6.0, a=0.0, x0=10.0 + CAR[0], n=80)
        event = make_event(ego, obj)
        assert event.track_ended
        pgt = build_pseudo_ground_truth(event, CFG)
        assert pgt.md_pseudo.min_md == 0.0
        cls = classify_event(event, pgt)
        assert cls.verdict is Verdict.TCPR

    def test_path_exhausted_before_contact_is_track_ended(self):
        # driver stops 1 m short of a parked car; the hypothetical ego can
        # never reach the box because the observed path ends short of it
        path_length = 0.2 * 10.0 + 100.0 / 16.0
        ego = straight_snippet(v0=10.0, a=-8.0, brake_from=0.2)
        obj = stationary_snippet(x=path_length + CAR[0] + 1.0)
        event = make_event(ego, obj)
        pgt = build_pseudo_ground_truth(event, CFG)
        assert pgt.hyp_ego.path_exhausted
        assert pgt.md_pseudo.min_md == pytest.approx(1.0, abs=1e-6)
        cls = classify_event(event, pgt)
        assert cls.verdict is Verdict.FCPR
        assert cls.reason is Reason.TRACK_ENDED

    def test_contact_only_after_exhaustion_is_conservative(self):
        # the hypothetical ego exhausts the slowed observed path early and
        # holds its end pose; an object crossing that spot afterwards (while
        # the observed ego is still well behind) is not a valid contact
        ego = straight_snippet(v0=12.0, a=-8.0, hold_speed=4.0, brake_from=0.2)
        path_length = ego[-1].x  # 25.6 m
        n = CFG.n_steps + 1
        obj = [SnippetSample(t=k * CFG.dt, x=path_length, y=30.0 - 10.0 * k * CFG.dt,
                             psi=-math.pi / 2, v=10.0, a=0.0) for k in range(n)]
        event = make_event(ego, obj)
        pgt = build_pseudo_ground_truth(event, CFG)
        assert pgt.md_observed.min_md > 0.0
        assert pgt.hyp_ego.path_exhausted
        first_zero = pgt.md_pseudo.first_zero_t()
        assert first_zero is not None and first_zero > pgt.hyp_ego.exhausted_t
        cls = classify_event(event, pgt)
        assert cls.verdict is Verdict.FCPR
        assert cls.reason is Reason.TRACK_ENDED

    def test_verdict_iff_reason_invariant(self, suite_events, aebs_cfg):
        for events in suite_events.values():
            for e in events:
                cls = classify_event(e, build_pseudo_ground_truth(e, aebs_cfg))
                assert (cls.verdict is Verdict.TCPR) == (cls.reason is Reason.PSEUDO_COLLISION)

    def test_conservativeness_small_fuzz(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            event = random_overlap_event(rng, CFG)
            cls = classify_event(event, build_pseudo_ground_truth(event, CFG))
            assert cls.verdict is Verdict.FCPR


def random_overlap_event(rng: np.random.Generator, cfg: AebsConfig) -> BrakeEvent:
    """Random snippets with an injected observed bounding-box overlap."""
    n = int(rng.integers(10, cfg.n_steps + 2))
    v0 = float(rng.uniform(1.0, 20.0))
    a0 = float(rng.uniform(-8.0, 2.0))
    psi0 = float(rng.uniform(-math.pi, math.pi))
    curve = float(rng.uniform(-0.05, 0.05))
    ego = []
    x, y, v = float(rng.uniform(-50, 50)), float(rng.uniform(-50, 50)), v0
    for k in range(n):
        psi = psi0 + curve * k
        ego.append(SnippetSample(t=k * cfg.dt, x=x, y=y, psi=psi, v=v, a=a0))
        x += v * cfg.dt * math.cos(psi)
        y += v * cfg.dt * math.sin(psi)
        v = max(0.0, v + a0 * cfg.dt)
    obj = []
    ox, oy = x + rng.uniform(-30, 30), y + rng.uniform(-30, 30)
    ovx, ovy = rng.uniform(-10, 10), rng.uniform(-10, 10)
    for k in range(n):
        obj.append(SnippetSample(t=k * cfg.dt, x=ox + ovx * k * cfg.dt,
                                 y=oy + ovy * k * cfg.dt,
                                 psi=float(rng.uniform(-math.pi, math.pi)),
                                 v=math.hypot(ovx, ovy), a=0.0))
    # inject the overlap at a random step: object sits on the ego center
    k = int(rng.integers(0, n))
    e = ego[k]
    obj[k] = SnippetSample(t=e.t, x=e.x + float(rng.uniform(-0.3, 0.3)),
                           y=e.y + float(rng.uniform(-0.3, 0.3)),
                           psi=obj[k].psi, v=obj[k].v, a=obj[k].a)
    dims_obj = (float(rng.uniform(0.6, 5.0)), float(rng.uniform(0.6, 2.5)))
    return make_event(ego, obj, obj_dims=dims_obj,
                      track_ended=bool(rng.integers(0, 2)))
