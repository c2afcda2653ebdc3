import numpy as np
import pytest
from hypothesis import given, strategies as st

from arcflow import (AREA_PRESERVING, CSF, BoundaryLift, CircleSupport,
                     DensityProbe, DiscreteCurve, DomainError, FlowState,
                     InvalidInputError, chord_region_convex, enclosed_area,
                     gaussian_density, index, orthogonal_arc, rotated)
from arcflow.diagnostics import (RunBounds, assemble_record, index_from_turnings,
                                 shoelace_area, sigma_arc_nodes)
from arcflow.support import TableSupport

from .helpers import open_arc, segment

# frozen Monte-Carlo oracle (1e6 samples, seed 20240817) for the area between
# the unit-radius orthogonal arc and the unit circle; closed form is pi/2 + 1
LENS_AREA_MC = 2.57026
LENS_AREA_EXACT = np.pi / 2 + 1


class TestEnclosedArea:
    def test_unit_square_shoelace_core(self):
        square = DiscreteCurve(nodes=[[0, 0], [1, 0], [1, 1], [0, 1]], closed=True)
        assert shoelace_area(square) == pytest.approx(1.0)

    def test_stationary_lens(self, unit_circle):
        curve, lift = orthogonal_arc(unit_circle, rho=1.0, n=400)
        area = enclosed_area(curve, unit_circle, lift)
        assert area == pytest.approx(LENS_AREA_EXACT, rel=1e-4)
        assert abs(area - LENS_AREA_MC) / LENS_AREA_MC < 5e-3

    def test_degenerate_curve_on_support(self, unit_circle):
        # curve tracing the support arc itself encloses nothing; build the
        # curve from the same sample the boundary-arc integral uses
        lift = BoundaryLift(a=0.3, b=1.7)
        pts = sigma_arc_nodes(unit_circle, lift)
        curve = DiscreteCurve(nodes=pts)
        assert abs(enclosed_area(curve, unit_circle, lift)) < 1e-9

    def test_lift_mismatch_rejected(self, unit_circle):
        curve, lift = orthogonal_arc(unit_circle, rho=1.0, n=50)
        bad = BoundaryLift(a=lift.a + 0.5, b=lift.b + 0.5)
        with pytest.raises(InvalidInputError):
            enclosed_area(curve, unit_circle, bad)

    def test_rigid_motion_invariance(self, unit_circle):
        # rotate curve and support together: rotating the circle about its
        # center shifts the lift parameters by R * angle
        curve, lift = orthogonal_arc(unit_circle, rho=1.0, n=120)
        base = enclosed_area(curve, unit_circle, lift)
        for angle in (0.5, -1.2, 3.0):
            moved = rotated(curve, angle)
            shifted = BoundaryLift(a=lift.a + angle, b=lift.b + angle)
            area = enclosed_area(moved, unit_circle, shifted)
            assert area == pytest.approx(base, rel=1e-10)


class TestIndex:
    def test_stationary_arc(self, unit_circle):
        curve, lift = orthogonal_arc(unit_circle, rho=1.0, n=200)
        report = index(curve, unit_circle, lift)
        assert report.value == 1
        assert report.consistent

    def test_half_circle_on_near_flat_support(self):
        # huge support circle looks locally flat; a semicircle attached to it
        # turns by pi while the boundary arc turns by almost nothing
        big = CircleSupport(1000.0)
        rho = 1.0
        d = np.hypot(1000.0, rho)
        th_star = np.arccos(-rho / d)
        th = np.linspace(-th_star, th_star, 200)
        nodes = np.array([d, 0.0]) + rho * np.stack([np.cos(th), np.sin(th)], axis=1)
        curve = DiscreteCurve(nodes=nodes)
        from arcflow.initial import attach_endpoints
        lift = attach_endpoints(big, curve)
        report = index(curve, big, lift)
        assert report.value == 1

    def test_synthetic_formula(self):
        report = index_from_turnings(3 * np.pi, 0.0)
        assert report.value == 2
        assert report.raw == pytest.approx(2.0)

    def test_inconsistent_raw_flagged(self):
        report = index_from_turnings(np.pi * 0.5, 0.0)
        assert not report.consistent


class TestGaussianDensity:
    def test_long_line_through_center_is_unit_mass(self):
        # full-line Gaussian integral is exactly 1; a +-8 sigma window at
        # t = T - 1 captures it to well under the 1e-3 tolerance
        probe = DensityProbe(x0=(0.0, 0.0), T_probe=1.0)
        line = segment(2001, p0=(-8.0, 0.0), p1=(8.0, 0.0))
        val = gaussian_density(line, probe, t=0.0)
        assert val == pytest.approx(1.0, abs=1e-3)

    def test_far_curve_negligible(self):
        probe = DensityProbe(x0=(0.0, 0.0), T_probe=1.0)
        far = open_arc(64, radius=1.0, center=(50.0, 0.0))
        assert gaussian_density(far, probe, t=0.0) < 1e-6

    def test_accumulator_closed_form(self):
        probe = DensityProbe(x0=(0.0, 0.0), T_probe=10.0)
        steps = 2000
        dt = 2.0 / steps
        for _ in range(steps):
            probe.accumulate(1.0, dt)  # kappa_bar == 1 for t in [0, 2]
        assert probe.f_accumulator == pytest.approx(np.exp(-1.0), abs=1e-6)

    def test_after_probe_time_rejected(self):
        probe = DensityProbe(x0=(0.0, 0.0), T_probe=1.0)
        with pytest.raises(DomainError):
            gaussian_density(segment(10), probe, t=1.0)


class TestChordRegionConvex:
    def test_arc_plus_chord(self):
        # arcs spanning at least pi have junction turns below pi/2, as in the
        # flow's admissible regime
        assert chord_region_convex(open_arc(60, angle0=-1.7, angle1=1.7))

    def test_s_shape_fails(self):
        t = np.linspace(0, 1, 60)
        nodes = np.stack([t, 0.2 * np.sin(2 * np.pi * t)], axis=1)
        assert not chord_region_convex(DiscreteCurve(nodes=nodes))

    def test_shallow_arc_junctions_exceed_window(self):
        # an arc spanning well under pi meets its chord at more than pi/2
        assert not chord_region_convex(open_arc(60, angle0=0.3, angle1=2.4))

    def test_semicircle_with_diameter_chord(self):
        # junction turns sit exactly at pi/2, inside the allowed window
        assert chord_region_convex(open_arc(80, angle0=0.0, angle1=np.pi))

    def test_orientation_agnostic(self):
        c = open_arc(60, angle0=-1.7, angle1=1.7)
        rev = DiscreteCurve(nodes=c.nodes[::-1].copy())
        assert chord_region_convex(rev)


class TestAssembleRecord:
    def test_stationary_arc_record(self, unit_circle):
        curve, lift = orthogonal_arc(unit_circle, rho=1.0, n=200)
        state = FlowState(curve=curve, lift=lift)
        bounds = RunBounds.from_initial(state, unit_circle)
        rec = assemble_record(state, unit_circle, bounds, mode=AREA_PRESERVING)
        assert rec.residual_l2 < 1e-6
        assert rec.index == 1
        assert all(v for v in rec.flags.values())
        assert rec.turning == pytest.approx(1.5 * np.pi, abs=0.05)

    def test_csf_record_suppresses_windows(self):
        from .helpers import closed_circle
        state = FlowState(curve=closed_circle(64))
        rec = assemble_record(state, None, None, mode=CSF)
        assert "kappa_bar_in_window" not in rec.flags
        assert np.isfinite(rec.kappa_bar)

    def test_csv_row_matches_columns(self, unit_circle):
        from arcflow.diagnostics import CSV_COLUMNS
        curve, lift = orthogonal_arc(unit_circle, rho=1.0, n=80)
        state = FlowState(curve=curve, lift=lift)
        rec = assemble_record(state, unit_circle, None, mode=AREA_PRESERVING)
        assert len(rec.csv_row()) == len(CSV_COLUMNS)


@given(st.floats(min_value=-np.pi, max_value=np.pi))
def test_density_rotation_invariant_about_probe(angle):
    probe = DensityProbe(x0=(0.0, 0.0), T_probe=2.0)
    c = open_arc(40, radius=1.0, center=(0.5, 0.0))
    v1 = gaussian_density(c, probe, t=0.5)
    v2 = gaussian_density(rotated(c, angle), probe, t=0.5)
    assert v2 == pytest.approx(v1, rel=1e-9)
