"""Monitored quantities of a flow state: area, index, density, windows.

Everything here is a pure computation over an immutable snapshot except
the probe accumulator, which the runner feeds once per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve import DiscreteCurve, curvature, node_tangents, total_turning
from .errors import DomainError, InvalidInputError
from .support import BoundaryLift, SupportCurve

CSV_COLUMNS = ("t", "length", "area", "kappa_bar", "turning", "min_kappa",
               "max_kappa", "index", "residual_l2", "density")


def sigma_arc_nodes(sigma: SupportCurve, lift: BoundaryLift) -> np.ndarray:
    """Boundary-arc sample from lift.a to lift.b at the support table resolution."""
    return sigma.arc_points(lift.a, lift.b)


def enclosed_area(curve: DiscreteCurve, sigma: SupportCurve,
                  lift: BoundaryLift) -> float:
    """Oriented area enclosed between the curve and its boundary arc.

    Shoelace integral over the closed concatenation of the curve and the
    reversed support arc from a to b.  Positive when the curve runs
    counterclockwise outside a positively oriented support.
    """
    diam = sigma.metrics().diameter
    pa = sigma.point(lift.a)
    pb = sigma.point(lift.b)
    if (np.hypot(*(curve.nodes[0] - pa)) > 1e-6 * diam
            or np.hypot(*(curve.nodes[-1] - pb)) > 1e-6 * diam):
        raise InvalidInputError("lift parameters do not match the curve endpoints")
    arc = sigma_arc_nodes(sigma, lift)
    poly = np.vstack([curve.nodes, arc[::-1][1:-1]])
    x, y = poly[:, 0], poly[:, 1]
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def shoelace_area(curve: DiscreteCurve) -> float:
    """Signed area of a closed polyline (positive for counterclockwise)."""
    x, y = curve.nodes[:, 0], curve.nodes[:, 1]
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


@dataclass(frozen=True)
class IndexReport:
    """Turning number of the curve-minus-boundary-arc concatenation."""

    value: int
    raw: float
    consistent: bool


def index_from_turnings(curve_turning: float, arc_turning: float) -> IndexReport:
    raw = (curve_turning - arc_turning) / (2.0 * np.pi) + 0.5
    value = int(np.rint(raw))
    return IndexReport(value=value, raw=float(raw),
                       consistent=bool(abs(raw - value) <= 0.2))


def index(curve: DiscreteCurve, sigma: SupportCurve, lift: BoundaryLift) -> IndexReport:
    """Index of the closed concatenation; 1 for admissible configurations.

    Computed from the turning of the open curve, the turning of the support
    arc between the lift parameters, and the two right-angle corners. A raw
    value farther than 0.2 from an integer marks the discrete turning as
    untrustworthy (consistent=False) rather than silently rounding.
    """
    if lift.width <= 0:
        raise InvalidInputError("index needs lift.b > lift.a")
    return index_from_turnings(total_turning(curve), sigma.arc_turning(lift.a, lift.b))


@dataclass
class DensityProbe:
    """Gaussian density probe anchored at a support point.

    ``f_accumulator`` carries exp(-1/2 int kappa_bar^2 dt), updated by the
    runner with one trapezoid term per step.
    """

    x0: np.ndarray
    T_probe: float
    f_accumulator: float = 1.0
    _exponent: float = field(default=0.0, repr=False)
    _last_kbar_sq: float | None = field(default=None, repr=False)

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)

    def accumulate(self, kappa_bar: float, dt: float) -> None:
        k2 = kappa_bar * kappa_bar
        prev = self._last_kbar_sq if self._last_kbar_sq is not None else k2
        self._exponent += 0.5 * (prev + k2) * dt
        self._last_kbar_sq = k2
        self.f_accumulator = float(np.exp(-0.5 * self._exponent))


def gaussian_density(curve: DiscreteCurve, probe: DensityProbe, t: float) -> float:
    """Weighted backward-heat-kernel mass of the curve seen from the probe.

    Integrates rho(x, t) = (4 pi (T - t))^{-1/2} exp(-|x - x0|^2 / (4 (T - t)))
    over the curve and multiplies by the probe's accumulated weight.  For
    probe points on a convex support this quantity is non-increasing along
    the flow.
    """
    if t >= probe.T_probe:
        raise DomainError("density probe requires t < T_probe")
    sigma2 = probe.T_probe - t
    samples = curvature(curve)
    d2 = np.sum((curve.nodes - probe.x0) ** 2, axis=1)
    rho = np.exp(-d2 / (4.0 * sigma2)) / np.sqrt(4.0 * np.pi * sigma2)
    return float(probe.f_accumulator * (rho * samples.weights).sum())


def chord_region_convex(curve: DiscreteCurve, tol: float = 1e-9,
                        junction_limit: float = np.pi / 2 + 0.05) -> bool:
    """True iff the curve closed by its endpoint chord bounds a convex region.

    All cross products of consecutive edges must share one sign (within a
    relative tolerance) and the two junction turns at the chord must lie in
    [0, pi/2 + 0.05] for the curve's orientation.
    """
    if curve.closed:
        raise InvalidInputError("chord closure applies to open curves")
    P = curve.nodes
    edges = np.diff(P, axis=0)
    chord = P[0] - P[-1]
    if np.hypot(*chord) == 0.0:
        return False
    ring = np.vstack([edges, chord])
    nxt = np.roll(ring, -1, axis=0)
    cross = ring[:, 0] * nxt[:, 1] - ring[:, 1] * nxt[:, 0]
    scale = np.hypot(ring[:, 0], ring[:, 1]) * np.hypot(nxt[:, 0], nxt[:, 1])
    orientation = 1.0 if cross.sum() >= 0 else -1.0
    if np.any(orientation * cross < -tol * scale):
        return False
    # junction turns: into the chord at the last node, out of it at the first
    for u, v in ((edges[-1], chord), (chord, edges[0])):
        turn = orientation * np.arctan2(u[0] * v[1] - u[1] * v[0], u @ v)
        if not -tol <= turn <= junction_limit:
            return False
    return True


@dataclass(frozen=True)
class RunBounds:
    """Initial-data constants fixing the monitored windows of a run."""

    L0: float
    A0: float
    diameter: float

    @classmethod
    def from_initial(cls, state, sigma: SupportCurve) -> "RunBounds":
        samples = curvature(state.curve)
        return cls(L0=samples.length,
                   A0=enclosed_area(state.curve, sigma, state.lift),
                   diameter=sigma.metrics().diameter)

    @property
    def kappa_bar_window(self) -> tuple[float, float]:
        return (np.pi / self.L0,
                (self.L0 + 2.0 * self.diameter) * np.pi / (2.0 * self.A0))

    @property
    def length_floor(self) -> float:
        return 4.0 * self.A0 / (self.L0 + 2.0 * self.diameter)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """All monitored quantities at one time slice."""

    t: float
    length: float
    area: float
    kappa_bar: float
    turning: float
    index: int
    min_kappa: float
    max_kappa: float
    residual_l2: float
    density: float
    flags: dict

    def csv_row(self) -> list:
        return [self.t, self.length, self.area, self.kappa_bar, self.turning,
                self.min_kappa, self.max_kappa, self.index, self.residual_l2,
                self.density]


def assemble_record(state, sigma: SupportCurve | None, bounds: RunBounds | None,
                    probes: list | None = None, mode: str = "area_preserving",
                    slack: float = 0.05) -> DiagnosticsRecord:
    """Populate a record with every monitored quantity and window flag.

    Window flags apply to attached area-preserving runs; in csf mode (or for
    free curves) they are suppressed as not applicable.
    """
    curve = state.curve
    samples = curvature(curve)
    L = samples.length
    kbar = samples.integral() / L
    kap = samples.values
    residual = float(((kap - kbar) ** 2 * samples.weights).sum())
    attached = getattr(state, "attached", False)
    windows_apply = attached and mode == "area_preserving" and bounds is not None

    if curve.closed:
        turning = 2.0 * np.pi * np.sign(kbar)
        area = shoelace_area(curve)
        idx = IndexReport(value=int(np.rint(turning / (2 * np.pi))), raw=0.0,
                          consistent=True)
    else:
        turning = total_turning(curve)
        if attached:
            area = enclosed_area(curve, sigma, state.lift)
            idx = index(curve, sigma, state.lift)
        else:
            area = np.nan
            idx = IndexReport(value=0, raw=np.nan, consistent=True)

    density = np.nan
    if probes:
        probe = probes[0]
        if state.t < probe.T_probe:
            density = gaussian_density(curve, probe, state.t)

    flags: dict = {}
    if not curve.closed:
        flags["embedded"] = not _self_intersects(curve)
        flags["chord_region_convex"] = chord_region_convex(curve)
        flags["index_consistent"] = idx.consistent
    if windows_apply:
        lo, hi = bounds.kappa_bar_window
        h = float(np.max(np.hypot(*np.diff(curve.nodes, axis=0).T)))
        insets = np.array([sigma.signed_inset(p) for p in curve.nodes])
        flags["kappa_bar_in_window"] = bool(lo * (1 - slack) <= kbar <= hi * (1 + slack))
        flags["turning_in_window"] = bool(np.pi - 0.05 <= turning < 2.0 * np.pi)
        flags["contained_in_D"] = bool(np.abs(insets).max() <= bounds.L0 / 2.0 + h)
        flags["length_above_floor"] = bool(L >= bounds.length_floor * (1 - slack))

    return DiagnosticsRecord(
        t=float(state.t), length=float(L), area=float(area), kappa_bar=float(kbar),
        turning=float(turning), index=idx.value, min_kappa=float(kap.min()),
        max_kappa=float(kap.max()), residual_l2=residual, density=float(density),
        flags=flags)


def _self_intersects(curve):
    from .curve import self_intersects
    return self_intersects(curve)
