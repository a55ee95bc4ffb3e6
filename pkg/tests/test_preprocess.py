import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aebresim.errors import MissingDimension, SeriesTooShort
from aebresim.geometry import wrap_angle_array
from aebresim.preprocess import (
    apply_default_dimensions,
    derive_heading,
    derive_kinematics,
    prepare_recording,
    smooth_heading,
)
from aebresim.tracks import (
    ParticipantClass,
    ParticipantMeta,
    Recording,
    Track,
    TrackSample,
)

FPS = 25.0


def samples_from_vel(vel: list[tuple[float, float]]) -> list[TrackSample]:
    x = y = 0.0
    out = []
    for f, (vx, vy) in enumerate(vel):
        out.append(TrackSample(frame=f, t=f / FPS, x=x, y=y,
                               vx=vx, vy=vy, ax=0.0, ay=0.0))
        x += vx / FPS
        y += vy / FPS
    return out


class TestDeriveHeading:
    def test_along_x(self):
        est = derive_heading(samples_from_vel([(1.5, 0.0)] * 3), 1.0)
        assert est.heading == pytest.approx([0.0] * 3)
        assert not est.all_low_speed

    def test_along_y(self):
        est = derive_heading(samples_from_vel([(0.0, 2.0)] * 3), 1.0)
        assert est.heading == pytest.approx([math.pi / 2] * 3)

    def test_low_speed_midpoint_interpolated(self):
        vel = [(2.0, 0.0), (0.1, 0.1), (0.0, 2.0)]
        est = derive_heading(samples_from_vel(vel), 1.0)
        assert est.heading[0] == pytest.approx(0.0)
        assert est.heading[1] == pytest.approx(math.pi / 4)
        assert est.heading[2] == pytest.approx(math.pi / 2)

    def test_interpolation_takes_shortest_arc(self):
        # from +170deg to -170deg the short way crosses the pi seam
        a, b = math.radians(170), math.radians(-170)
        vel = [(math.cos(a) * 2, math.sin(a) * 2), (0.0, 0.0),
               (math.cos(b) * 2, math.sin(b) * 2)]
        est = derive_heading(samples_from_vel(vel), 1.0)
        assert est.heading[1] == pytest.approx(math.pi, abs=1e-9)

    def test_leading_trailing_runs_copy_neighbor(self):
        vel = [(0.0, 0.0), (0.1, 0.0), (2.0, 2.0), (0.0, 0.0)]
        est = derive_heading(samples_from_vel(vel), 1.0)
        assert est.heading[0] == pytest.approx(math.pi / 4)
        assert est.heading[1] == pytest.approx(math.pi / 4)
        assert est.heading[3] == pytest.approx(math.pi / 4)

    def test_all_low_speed_flagged(self):
        est = derive_heading(samples_from_vel([(0.1, 0.1)] * 5), 1.0)
        assert est.all_low_speed
        assert est.heading == pytest.approx([0.0] * 5)

    @given(scale=st.floats(0.001, 1000.0))
    @settings(max_examples=50, deadline=None)
    def test_invariant_under_speed_scaling(self, scale):
        vel = [(3.0, 1.0), (2.0, -2.0), (-1.5, 2.5)]
        base = derive_heading(samples_from_vel(vel), 1e-9)
        scaled = derive_heading(
            samples_from_vel([(vx * scale, vy * scale) for vx, vy in vel]), 1e-9)
        assert scaled.heading == pytest.approx(base.heading)


class TestSmoothHeading:
    def test_constant_reproduced(self):
        out = smooth_heading(np.full(30, 1.2), FPS)
        assert np.max(np.abs(out - 1.2)) < 1e-12

    def test_linear_ramp_reproduced(self):
        t = np.arange(60) / FPS
        ramp = -0.8 + 0.5 * t
        out = smooth_heading(ramp, FPS)
        assert np.max(np.abs(out - ramp)) < 1e-9

    def test_quantization_noise_attenuated(self):
        t = np.arange(100) / FPS
        ramp = 0.5 * t
        noise = ramp + 0.01 * ((-1.0) ** np.arange(100))
        out = smooth_heading(noise, FPS)
        rms_in = np.sqrt(np.mean((noise - ramp) ** 2))
        rms_out = np.sqrt(np.mean((out - ramp) ** 2))
        assert rms_out < rms_in

    def test_single_spike_attenuated_80_percent(self):
        t = np.arange(100) / FPS
        ramp = 0.2 * t
        spiked = ramp.copy()
        spiked[50] += 0.5
        out = smooth_heading(spiked, FPS)
        assert abs(out[50] - ramp[50]) <= 0.2 * 0.5

    def test_endpoints_preserved(self):
        t = np.arange(80) / FPS
        series = 0.3 * t + 0.01 * ((-1.0) ** np.arange(80))
        out = smooth_heading(series, FPS)
        assert abs(out[0] - series[0]) < 0.05
        assert abs(out[-1] - series[-1]) < 0.05

    def test_wrap_seam_handled(self):
        raw = np.linspace(3.0, 3.4, 60)  # crosses +pi
        wrapped = wrap_angle_array(raw)
        out = smooth_heading(wrapped, FPS)
        assert np.max(np.abs(np.unwrap(out) - raw)) < 1e-9

    def test_too_short_rejected(self):
        with pytest.raises(SeriesTooShort):
            smooth_heading([0.0, 0.1, 0.2], FPS)

    def test_output_wrapped(self):
        out = smooth_heading(np.full(10, 3.1), FPS)
        assert np.all(out <= math.pi)
        assert np.all(out > -math.pi)


class TestDeriveKinematics:
    def test_turn_rate_from_gradient(self):
        n = 10
        headings = [0.1 * k for k in range(n)]
        samples = samples_from_vel([(5.0, 0.0)] * n)
        states = derive_kinematics(samples, headings, FPS)
        for s in states:
            assert s.omega == pytest.approx(0.1 * FPS)

    def test_constant_heading_zero_omega(self):
        states = derive_kinematics(samples_from_vel([(4.0, 3.0)] * 8),
                                   [0.6435011087932844] * 8, FPS)
        assert all(abs(s.omega) < 1e-9 for s in states)

    def test_longitudinal_acceleration_projection(self):
        samples = [TrackSample(frame=0, t=0.0, x=0, y=0, vx=10, vy=0, ax=-3.0, ay=0.0),
                   TrackSample(frame=1, t=0.04, x=0.4, y=0, vx=10, vy=0, ax=-3.0, ay=0.0)]
        states = derive_kinematics(samples, [0.0, 0.0], FPS)
        assert states[0].a == pytest.approx(-3.0)

    def test_sideslip(self):
        beta = math.radians(15)
        v = 5.0
        samples = samples_from_vel([(v * math.cos(beta), v * math.sin(beta))] * 4)
        states = derive_kinematics(samples, [0.0] * 4, FPS)
        assert states[0].beta == pytest.approx(beta)
        assert states[0].v == pytest.approx(v)

    def test_sideslip_zero_at_low_speed(self):
        samples = samples_from_vel([(0.3, 0.3)] * 4)
        states = derive_kinematics(samples, [0.0] * 4, FPS)
        assert all(s.beta == 0.0 for s in states)

    def test_beta_zero_when_collinear(self):
        psi = 0.7
        samples = samples_from_vel([(6 * math.cos(psi), 6 * math.sin(psi))] * 5)
        states = derive_kinematics(samples, [psi] * 5, FPS)
        assert all(s.beta == pytest.approx(0.0, abs=1e-12) for s in states)


class TestDefaultDimensions:
    def test_pedestrian_defaults(self):
        meta = apply_default_dimensions(
            ParticipantMeta(track_id=1, cls=ParticipantClass.PEDESTRIAN))
        assert meta.width == 0.6
        assert meta.length == 0.6

    def test_bicycle_defaults(self):
        meta = apply_default_dimensions(
            ParticipantMeta(track_id=1, cls=ParticipantClass.BICYCLE))
        assert meta.width == 0.6
        assert meta.length == 1.5

    def test_motorcycle_defaults(self):
        meta = apply_default_dimensions(
            ParticipantMeta(track_id=1, cls=ParticipantClass.MOTORCYCLE))
        assert meta.length == 1.5

    def test_narrow_vru_width_floored(self):
        meta = apply_default_dimensions(
            ParticipantMeta(track_id=1, cls=ParticipantClass.BICYCLE, width=0.4, length=1.8))
        assert meta.width == 0.6
        assert meta.length == 1.8

    def test_car_unchanged(self):
        meta = ParticipantMeta(track_id=1, cls=ParticipantClass.CAR, width=1.8, length=4.5)
        assert apply_default_dimensions(meta) == meta

    def test_car_without_dims_rejected(self):
        with pytest.raises(MissingDimension):
            apply_default_dimensions(ParticipantMeta(track_id=1, cls=ParticipantClass.CAR))


class TestPrepareRecording:
    def _recording(self, has_heading: bool) -> Recording:
        samples = []
        for f in range(40):
            psi = 0.02 * f
            samples.append(TrackSample(
                frame=f, t=f / FPS, x=0.4 * f, y=0.0,
                vx=10 * math.cos(psi), vy=10 * math.sin(psi), ax=0.0, ay=0.0,
                heading=psi if has_heading else None))
        meta = ParticipantMeta(track_id=3, cls=ParticipantClass.CAR, width=1.8, length=4.5)
        return Recording(recording_id="r", fps=FPS, has_heading=has_heading,
                         tracks={3: Track(meta=meta, samples=samples)})

    def test_recorded_headings_passed_through(self):
        prepared = prepare_recording(self._recording(True))
        assert prepared.tracks[3].states[5].psi == pytest.approx(0.1)

    def test_derived_headings_close_to_truth(self):
        prepared = prepare_recording(self._recording(False))
        assert prepared.tracks[3].states[20].psi == pytest.approx(0.4, abs=0.01)

    def test_frame_index(self):
        prepared = prepare_recording(self._recording(True))
        assert prepared.frame_index[0] == [3]
        assert prepared.tracks[3].state_at(41) is None
