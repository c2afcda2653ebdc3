import numpy as np
import pytest
from hypothesis import given, strategies as st

from arcflow import (CSF, DiscreteCurve, DomainError, FlowConfig, FlowState,
                     classify_singularity, curvature, fit_circular_arc,
                     grim_reaper, hamilton_rescale, parabolic_rescale, rotated,
                     run, self_shrinker_residual, step)
from arcflow.errors import InvalidInputError
from arcflow.rescaling import RescaledFrame, estimate_blowup_time

from .helpers import closed_circle, segment


class TestClassify:
    def test_shrinking_circle_is_type_one(self):
        # exact solution R = sqrt(2 (T - t)): kappa_max^2 (T - t) is 1/2;
        # sampling refines toward T as in a real adaptive-step run
        T = 0.5
        t = T - np.geomspace(T, 1e-4, 400)
        kmax = 1.0 / np.sqrt(2 * (T - t))
        report = classify_singularity(t, kmax)
        assert report.kind == "typeI"
        assert report.T_est == pytest.approx(T, abs=1e-6)
        assert report.sup_product == pytest.approx(0.5, abs=0.05)

    def test_faster_blowup_is_type_two(self):
        T = 0.5
        t = T - np.geomspace(T, 1e-6, 400)
        kmax = 1.0 / (T - t)
        report = classify_singularity(t, kmax, T_est=T)
        assert report.kind == "typeII"

    def test_constant_curvature_no_singularity(self):
        t = np.linspace(0, 1, 100)
        report = classify_singularity(t, np.full_like(t, 2.0))
        assert report.kind == "no-singularity"

    def test_sparse_tail_inconclusive(self):
        T = 0.5
        t = np.linspace(0.0, 0.4, 8)
        kmax = 1.0 / np.sqrt(2 * (T - t))
        report = classify_singularity(t, kmax, T_est=T)
        assert report.kind == "inconclusive"

    def test_estimate_slope_for_circle(self):
        T = 0.5
        t = np.linspace(0.3, 0.49, 50)
        kmax = 1.0 / np.sqrt(2 * (T - t))
        T_est, slope = estimate_blowup_time(t, kmax)
        assert T_est == pytest.approx(T, abs=1e-9)
        assert slope == pytest.approx(2.0, abs=1e-9)


class TestParabolicRescale:
    def test_identity_frame(self):
        state = FlowState(curve=segment(8), t=0.3)
        frame = parabolic_rescale(state, x0=(0, 0), T_est=1.0, Q=1.0)
        assert np.allclose(frame.curve.nodes, state.curve.nodes)
        assert frame.tau == pytest.approx(state.t - 1.0)

    def test_circle_normalizes(self):
        # at time t the circle has radius R = sqrt(1 - 2t); zoom by 1/R
        t = 0.3
        R = np.sqrt(1 - 2 * t)
        state = FlowState(curve=closed_circle(64, radius=R, center=(2.0, 0.0)), t=t)
        frame = parabolic_rescale(state, x0=(2.0, 0.0), T_est=0.5, Q=1.0 / R)
        assert np.allclose(np.hypot(*frame.curve.nodes.T), 1.0, atol=1e-12)
        assert frame.tau == pytest.approx(-0.5)

    def test_curvature_scaling_law(self):
        state = FlowState(curve=closed_circle(48, radius=0.25), t=0.0)
        frame = parabolic_rescale(state, x0=(0, 0), T_est=1.0, Q=4.0)
        kap = curvature(frame.curve).values
        assert np.allclose(kap, 0.25 / 0.25, atol=1e-12)  # kappa / Q = 4 / 4

    def test_bad_scale_rejected(self):
        state = FlowState(curve=segment(8), t=0.0)
        with pytest.raises(DomainError):
            parabolic_rescale(state, x0=(0, 0), T_est=1.0, Q=0.0)


class TestHamilton:
    def test_single_snapshot_degenerate(self):
        snaps = [FlowState(curve=closed_circle(32, radius=0.5), t=0.0)]
        frames = hamilton_rescale(snaps, j_ladder=[4], T_est=1.0)
        assert len(frames) == 1
        frame = frames[0]
        assert frame.tau == pytest.approx(0.0)
        assert frame.Q == pytest.approx(2.0, abs=1e-12)
        # frame curvature at the center node is exactly 1 after scaling
        kap = curvature(frame.curve).values
        assert kap[frame.center_node] == pytest.approx(1.0, abs=1e-12)

    def test_requires_snapshots(self):
        with pytest.raises(InvalidInputError):
            hamilton_rescale([])


class TestShrinkerResidual:
    def test_unit_circle_half_time(self):
        frame = RescaledFrame(curve=closed_circle(128), tau=-0.5, Q=1.0,
                              origin=np.zeros(2))
        resid, l2 = self_shrinker_residual(frame)
        assert np.abs(resid).max() < 1e-10
        assert l2 < 1e-10

    def test_line_through_origin(self):
        frame = RescaledFrame(curve=segment(16, p0=(-2, -2), p1=(2, 2)),
                              tau=-1.0, Q=1.0, origin=np.zeros(2))
        _, l2 = self_shrinker_residual(frame)
        assert l2 < 1e-12

    def test_offset_line_has_residual(self):
        frame = RescaledFrame(curve=segment(16, p0=(-2, 1), p1=(2, 1)),
                              tau=-1.0, Q=1.0, origin=np.zeros(2))
        _, l2 = self_shrinker_residual(frame)
        assert l2 > 0.1

    def test_positive_tau_rejected(self):
        frame = RescaledFrame(curve=segment(8), tau=0.5, Q=1.0, origin=np.zeros(2))
        with pytest.raises(DomainError):
            self_shrinker_residual(frame)

    @given(st.floats(min_value=-np.pi, max_value=np.pi))
    def test_rotation_covariance(self, angle):
        base = RescaledFrame(curve=closed_circle(48), tau=-0.5, Q=1.0,
                             origin=np.zeros(2))
        turned = RescaledFrame(curve=rotated(base.curve, angle), tau=-0.5, Q=1.0,
                               origin=np.zeros(2))
        _, l2a = self_shrinker_residual(base)
        _, l2b = self_shrinker_residual(turned)
        assert l2b == pytest.approx(l2a, abs=1e-10)


class TestGrimReaper:
    def test_tip_position_and_curvature(self):
        c = grim_reaper(tau=0.7, y_window=(-1.3, 1.3), n=401)
        i = np.argmin(c.nodes[:, 0])
        assert np.allclose(c.nodes[i], [0.7, 0.0], atol=1e-6)
        kap = curvature(c).values
        assert kap[i] == pytest.approx(1.0, abs=1e-4)

    def test_curvature_profile_is_cos_y(self):
        c = grim_reaper(tau=0.0, n=401)
        kap = curvature(c).values
        # largest node spacing is sec(1.3) * dy; endpoint error stays below h^2
        assert np.abs(kap - np.cos(c.nodes[:, 1])).max() < 6e-4
        assert np.abs(kap - np.cos(c.nodes[:, 1]))[3:-3].max() < 1e-4
        # spot value at y = pi/3
        j = np.argmin(np.abs(c.nodes[:, 1] - np.pi / 3))
        assert kap[j] == pytest.approx(0.5, abs=1e-3)

    def test_translation_identity(self):
        a = grim_reaper(tau=0.2, n=50)
        b = grim_reaper(tau=0.9, n=50)
        assert np.allclose(b.nodes - [0.7, 0.0], a.nodes, atol=1e-12)

    def test_window_limits(self):
        with pytest.raises(DomainError):
            grim_reaper(tau=0.0, y_window=(-np.pi / 2 + 0.01, 0.0))

    def test_short_evolution_translates(self):
        # evolve the window briefly under csf; nodes stay on the moved profile
        c = grim_reaper(tau=0.0, y_window=(-1.0, 1.0), n=128)
        config = FlowConfig(n_nodes=128, resample_every=10**9, t_end=0.1,
                            stop_tolerance=1e-30, max_kappa_abort=100.0)
        state = FlowState(curve=c)
        while state.t < 0.1:
            state, event = step(state, None, config, mode=CSF)
            assert event is None
        y = state.curve.nodes[:, 1]
        ref_x = -np.log(np.cos(y)) + state.t
        dist = np.abs(state.curve.nodes[:, 0] - ref_x) * np.cos(np.abs(y))
        assert dist.max() < 2e-3


class TestFitCircularArc:
    def test_exact_arc(self):
        th = np.linspace(0.3, 2.1, 64)
        nodes = np.array([0.5, -0.25]) + 2.0 * np.stack([np.cos(th), np.sin(th)], axis=1)
        fit = fit_circular_arc(DiscreteCurve(nodes=nodes))
        assert not fit.is_line
        assert fit.radius == pytest.approx(2.0, abs=1e-9)
        assert fit.rms_error < 1e-9
        assert np.allclose(fit.center, [0.5, -0.25], atol=1e-9)
        # endpoint tangents are perpendicular to the radius directions
        assert np.allclose(np.degrees(fit.contact_angles), [90, 90], atol=0.5)

    def test_noisy_arc(self):
        rng = np.random.default_rng(42)
        th = np.linspace(0.0, 3.0, 200)
        nodes = 2.0 * np.stack([np.cos(th), np.sin(th)], axis=1)
        nodes += rng.normal(0, 1e-3, nodes.shape)
        fit = fit_circular_arc(DiscreteCurve(nodes=nodes))
        assert fit.radius == pytest.approx(2.0, rel=0.01)
        assert 3e-4 < fit.rms_error < 3e-3

    def test_straight_segment_is_line(self):
        fit = fit_circular_arc(segment(32))
        assert fit.is_line
        assert fit.radius == np.inf


def test_parabolic_frames_of_circle_run_hit_shrinker_radius():
    # run the circle into the blowup, rescale snapshots near tau = -1/2 by
    # the max curvature: fitted radii approach sqrt(-2 tau) = 1
    config = FlowConfig(n_nodes=128, resample_every=10**9, t_end=0.7,
                        stop_tolerance=1e-30, max_kappa_abort=30.0)
    result = run(FlowState(curve=closed_circle(128)), None, config, mode=CSF,
                 snapshot_every=300)
    assert result.termination == "blowup-detected"
    times = np.array([s.t for s in result.states])
    kmax = np.array([np.abs(curvature(s.curve).values).max() for s in result.states])
    T_est, _ = estimate_blowup_time(times, kmax)
    # choose the snapshot whose rescaled time is closest to -1/2 under Q = kappa_max
    taus = kmax**2 * (times - T_est)
    i = int(np.argmin(np.abs(taus + 0.5)))
    frame = parabolic_rescale(result.states[i], x0=(0.0, 0.0), T_est=T_est,
                              Q=kmax[i])
    fit = fit_circular_arc(frame.curve)
    assert fit.radius == pytest.approx(np.sqrt(-2 * frame.tau), rel=0.02)
    assert fit.radius == pytest.approx(1.0, rel=0.05)
