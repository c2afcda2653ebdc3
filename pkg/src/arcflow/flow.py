"""Time integration of the normal-velocity flow (kappa - kappa_bar) nu.

Two modes are supported: the area-preserving flow proper, and plain curve
shortening (csf) where the average-curvature term is dropped.  Open curves
attached to a support move their endpoints along it with the tangential
speed kappa - kappa_bar and keep orthogonal contact; closed or free curves
skip the attachment machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import diagnostics
from .curve import (CurvatureSamples, DiscreteCurve, _menger, curvature,
                    node_normals, resample_uniform, segment_lengths,
                    self_intersects, total_turning)
from .errors import DomainError, InvalidCurveError, InvalidInputError
from .support import BoundaryLift, SupportCurve, advance_lift

AREA_PRESERVING = "area_preserving"
CSF = "csf"
_MODES = (AREA_PRESERVING, CSF)

# run / step termination events
EV_BLOWUP = "blowup-detected"
EV_COLLISION = "boundary-collision"
EV_FAILURE = "integration-failure"
EV_CONVERGED = "converged"
EV_TEND = "t-end"


@dataclass(frozen=True)
class FlowConfig:
    """Numerical parameters of a run.

    dt is chosen each step as ``dt_safety * h_min^2 / 2`` where h_min is the
    smallest segment length; this is the parabolic stability limit for a
    normal speed that acts like a second arclength derivative.
    """

    dt_safety: float = 0.4
    resample_every: int = 500
    n_nodes: int = 200
    t_end: float = 1.0
    stop_tolerance: float = 1e-8
    max_kappa_abort: float = 1e4

    def __post_init__(self):
        if not 0 < self.dt_safety <= 1:
            raise DomainError("dt_safety must be in (0, 1]")
        for name in ("resample_every", "n_nodes", "t_end", "stop_tolerance",
                     "max_kappa_abort"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")


@dataclass(frozen=True)
class FlowState:
    """One time slice of the evolution: curve, boundary lift, time, step count."""

    curve: DiscreteCurve
    lift: BoundaryLift | None = None
    t: float = 0.0
    step_index: int = 0

    @property
    def attached(self) -> bool:
        return self.lift is not None and not self.curve.closed


def validate_state(state: FlowState, sigma: SupportCurve, tol: float = 1e-9) -> None:
    """Check that the endpoints coincide with their lift positions on the support."""
    if not state.attached:
        return
    diam = sigma.metrics().diameter
    for node, s in ((state.curve.nodes[0], state.lift.a),
                    (state.curve.nodes[-1], state.lift.b)):
        if np.hypot(*(node - sigma.point(s))) > tol * diam:
            raise InvalidInputError("endpoints do not match the boundary lift")


def kappa_bar(curve: DiscreteCurve) -> float:
    """Average curvature: integral of kappa by arclength divided by length."""
    samples = curvature(curve)
    return samples.integral() / samples.length


def _reflect(point: np.ndarray, origin: np.ndarray, direction: np.ndarray) -> np.ndarray:
    d = point - origin
    return origin + 2.0 * (d @ direction) * direction - d


def flow_curvature(curve: DiscreteCurve, sigma: SupportCurve | None,
                   lift: BoundaryLift | None) -> CurvatureSamples:
    """Curvature samples as the integrator sees them.

    Interior nodes are Menger values.  For attached curves the endpoint
    curvature comes from a ghost-node stencil: the neighbor node reflected
    across the support tangent line at the contact point.  The reflection
    encodes the orthogonal contact condition, is exact on arcs meeting the
    support perpendicularly, and pulls a tilted contact angle back to
    perpendicular.  Free open curves fall back to the one-sided fit.
    """
    if curve.closed or sigma is None or lift is None:
        return curvature(curve)
    P = curve.nodes
    n = curve.n
    kap = np.empty(n)
    kap[1:-1] = _menger(P[:-2], P[1:-1], P[2:])
    ga = _reflect(P[1], P[0], sigma.tangent(lift.a))
    gb = _reflect(P[-2], P[-1], sigma.tangent(lift.b))
    kap[0] = _menger(ga, P[0], P[1])
    kap[-1] = _menger(P[-2], P[-1], gb)
    lens = segment_lengths(curve)
    w = np.empty(n)
    w[0] = lens[0] / 2.0
    w[-1] = lens[-1] / 2.0
    w[1:-1] = (lens[:-1] + lens[1:]) / 2.0
    return CurvatureSamples(values=kap, weights=w)


def velocity(curve: DiscreteCurve, mode: str, sigma: SupportCurve | None = None,
             lift: BoundaryLift | None = None) -> np.ndarray:
    """Per-node velocity vectors (kappa - kappa_bar) nu, or kappa nu in csf mode."""
    if mode not in _MODES:
        raise DomainError(f"unknown mode {mode!r}")
    samples = flow_curvature(curve, sigma, lift)
    kbar = samples.integral() / samples.length if mode == AREA_PRESERVING else 0.0
    nu = node_normals(curve)
    return (samples.values - kbar)[:, None] * nu


def _interior_normals(curve: DiscreteCurve) -> np.ndarray:
    """Node normals from central chords; cheap, endpoints by one-sided chords."""
    P = curve.nodes
    t = np.empty_like(P)
    if curve.closed:
        t[:] = np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)
    else:
        t[1:-1] = P[2:] - P[:-2]
        t[0] = P[1] - P[0]
        t[-1] = P[-1] - P[-2]
    t /= np.hypot(t[:, 0], t[:, 1])[:, None]
    out = np.empty_like(t)
    out[:, 0] = -t[:, 1]
    out[:, 1] = t[:, 0]
    return out


def _advance(state: FlowState, sigma: SupportCurve | None, config: FlowConfig,
             mode: str, samples: CurvatureSamples) -> tuple[FlowState, str | None]:
    curve = state.curve
    kap = samples.values
    if not np.isfinite(kap).all():
        return state, EV_FAILURE
    if np.abs(kap).max() > config.max_kappa_abort:
        return state, EV_BLOWUP
    kbar = samples.integral() / samples.length if mode == AREA_PRESERVING else 0.0
    nu = _interior_normals(curve)
    lens = segment_lengths(curve)
    hmin = float(lens.min())
    dt = config.dt_safety * hmin * hmin / 2.0
    speed = kap - kbar

    nodes = curve.nodes.copy()
    if state.attached:
        nodes[1:-1] += dt * speed[1:-1, None] * nu[1:-1]
        new_lift = advance_lift(state.lift, kap[0], kap[-1], kbar, dt)
        if new_lift.collided:
            return state, EV_COLLISION
        # re-snap: endpoints live exactly on the support
        nodes[0] = sigma.point(new_lift.a)
        nodes[-1] = sigma.point(new_lift.b)
    else:
        nodes += dt * speed[:, None] * nu
        new_lift = None
    if not np.isfinite(nodes).all():
        return state, EV_FAILURE

    try:
        new_curve = DiscreteCurve(nodes=nodes, closed=curve.closed)
    except InvalidCurveError:
        return state, EV_FAILURE
    new_index = state.step_index + 1
    if config.resample_every and new_index % config.resample_every == 0:
        new_curve = resample_uniform(new_curve, config.n_nodes)
    return FlowState(curve=new_curve, lift=new_lift, t=state.t + dt,
                     step_index=new_index), None


def step(state: FlowState, sigma: SupportCurve | None, config: FlowConfig,
         mode: str = AREA_PRESERVING) -> tuple[FlowState, str | None]:
    """Advance one explicit Euler step.

    Returns the new state and an event string, or None.  On a blowup or
    failure event the incoming state is returned unchanged (frozen for the
    rescaling lab).  The resampling cadence keeps the mesh uniform; open
    endpoints are pinned.
    """
    if mode not in _MODES:
        raise DomainError(f"unknown mode {mode!r}")
    lift = state.lift if state.attached else None
    samples = flow_curvature(state.curve, sigma if state.attached else None, lift)
    return _advance(state, sigma, config, mode, samples)


@dataclass
class RunResult:
    """Trajectory snapshots, diagnostics records and per-step monitor series."""

    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    termination: str = ""
    probes: list = field(default_factory=list)

    @property
    def final(self) -> FlowState:
        return self.states[-1]


def run(initial: FlowState, sigma: SupportCurve | None, config: FlowConfig,
        mode: str = AREA_PRESERVING, probes: list | None = None,
        snapshot_every: int = 500, max_steps: int = 2_000_000) -> RunResult:
    """Integrate until t_end, convergence, blowup or failure.

    Convergence means the dimensionless residual L * integral (kappa -
    kappa_bar)^2 ds fell below the configured stop tolerance.  The blowup
    check runs before the stop check each step.  Snapshots are stored every
    ``snapshot_every`` steps; once max |kappa| exceeds 10x its initial value
    the cadence switches to geometric in curvature so blowup runs keep
    resolution near the singular time.
    """
    probes = list(probes or [])
    state = initial
    if state.attached:
        validate_state(state, sigma)
    result = RunResult(probes=probes)
    cols = ("t", "dt", "length", "residual", "kappa_bar", "kappa_a", "kappa_b",
            "lift_a", "lift_b", "kappa_max")
    series = {c: [] for c in cols}

    samples = flow_curvature(state.curve, sigma if state.attached else None, state.lift)
    kmax0 = float(np.abs(samples.values).max())
    last_snap_kmax = kmax0
    bounds = diagnostics.RunBounds.from_initial(state, sigma) if state.attached else None

    def snapshot(st):
        result.states.append(st)
        result.records.append(diagnostics.assemble_record(
            st, sigma, bounds=bounds, probes=probes, mode=mode))

    termination = None
    while True:
        samples = flow_curvature(state.curve, sigma if state.attached else None,
                                 state.lift)
        kap = samples.values
        L = samples.length
        kbar = samples.integral() / L if mode == AREA_PRESERVING else 0.0
        residual = float(((kap - kbar) ** 2 * samples.weights).sum())
        kmax = float(np.abs(kap).max())

        want_snap = state.step_index % snapshot_every == 0
        if kmax > 10.0 * max(kmax0, 1e-300) and kmax > np.sqrt(2.0) * last_snap_kmax:
            want_snap = True
        if want_snap:
            snapshot(state)
            last_snap_kmax = kmax

        if kmax > config.max_kappa_abort:
            termination = EV_BLOWUP
            break
        if residual * L < config.stop_tolerance:
            termination = EV_CONVERGED
            break
        if state.t >= config.t_end:
            termination = EV_TEND
            break
        if state.step_index >= max_steps:
            termination = "step-limit"
            break

        new_state, event = _advance(state, sigma, config, mode, samples)
        if event is not None:
            termination = event
            break
        dt = new_state.t - state.t
        series["t"].append(state.t)
        series["dt"].append(dt)
        series["length"].append(L)
        series["residual"].append(residual)
        series["kappa_bar"].append(kbar)
        series["kappa_a"].append(kap[0])
        series["kappa_b"].append(kap[-1])
        series["lift_a"].append(state.lift.a if state.lift else np.nan)
        series["lift_b"].append(state.lift.b if state.lift else np.nan)
        series["kappa_max"].append(kmax)
        for probe in probes:
            probe.accumulate(kbar, dt)
        state = new_state

    if not result.states or result.states[-1].step_index != state.step_index:
        snapshot(state)
    result.termination = termination
    result.series = {k: np.asarray(v) for k, v in series.items()}
    return result


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the initial-data checks of the convergence theorem."""

    kappa_positive: bool
    embedded: bool
    outside_support: bool
    length_below_sigma_d: bool
    length_below_half_inv_kappa: bool
    length_below_arcsin_bound: bool
    isoperimetric_ok: bool
    L0: float
    A0: float
    c_I: float
    arcsin_bound: float
    sigma_d: float
    kappa_max_sigma: float
    min_kappa: float
    turning: float

    @property
    def admissible(self) -> bool:
        return (self.kappa_positive and self.embedded and self.outside_support
                and self.length_below_sigma_d and self.length_below_half_inv_kappa
                and self.length_below_arcsin_bound)


def check_admissibility(curve: DiscreteCurve, sigma: SupportCurve,
                        lift: BoundaryLift | None = None) -> AdmissibilityReport:
    """Evaluate the four initial-curve conditions plus derived constants.

    The length must be below the minimal support width, below half the
    inverse of the support's max curvature, and below the arcsin bound
    (4 / (5 kappa_max)) arcsin(A0 / L0^2).  The shape ratio A0 / L0^2 is
    also compared against the half-circle isoperimetric value 1 / (2 pi).
    """
    if curve.closed:
        raise InvalidInputError("admissibility applies to open attached curves")
    if lift is None:
        from .initial import attach_endpoints
        lift = attach_endpoints(sigma, curve)
    else:
        diam = sigma.metrics().diameter
        for node, s in ((curve.nodes[0], lift.a), (curve.nodes[-1], lift.b)):
            if np.hypot(*(node - sigma.point(s))) > 1e-6 * diam:
                raise InvalidInputError("endpoints are not on the support")
    samples = curvature(curve)
    L0 = samples.length
    A0 = diagnostics.enclosed_area(curve, sigma, lift)
    met = sigma.metrics()
    insets = np.array([sigma.signed_inset(p) for p in curve.nodes])
    outside = bool(np.all(insets <= 1e-9))
    c_I = A0 / L0**2
    bound = (4.0 / (5.0 * met.kappa_max)) * np.arcsin(min(c_I, 1.0)) if c_I > 0 else 0.0
    return AdmissibilityReport(
        kappa_positive=bool(samples.values.min() > 0.0),
        embedded=not self_intersects(curve),
        outside_support=outside,
        length_below_sigma_d=bool(L0 < met.sigma_d),
        length_below_half_inv_kappa=bool(L0 < 0.5 / met.kappa_max),
        length_below_arcsin_bound=bool(0 < c_I <= 1 and L0 < bound),
        isoperimetric_ok=bool(c_I <= 1.0 / (2.0 * np.pi) + 1e-9),
        L0=float(L0),
        A0=float(A0),
        c_I=float(c_I),
        arcsin_bound=float(bound),
        sigma_d=met.sigma_d,
        kappa_max_sigma=met.kappa_max,
        min_kappa=float(samples.values.min()),
        turning=float(total_turning(curve)),
    )
