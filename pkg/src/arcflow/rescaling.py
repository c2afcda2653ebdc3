"""Singularity analysis: blowup classification, rescaled frames, references.

The tools here post-process stored run snapshots.  Frames carry the scale
and time shift used so curvature comparisons stay dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import DiscreteCurve, curvature, node_normals
from .errors import DomainError, InvalidInputError


@dataclass(frozen=True)
class BlowupSample:
    """Node/time pair selected by a rescaling procedure, with its scale Q."""

    node_id: int
    t: float
    Q: float
    kind: str  # "typeI_candidate" or "hamilton"


@dataclass(frozen=True)
class RescaledFrame:
    """A curve after zooming by Q about an origin, at rescaled time tau."""

    curve: DiscreteCurve
    tau: float
    Q: float
    origin: np.ndarray
    center_node: int | None = None
    j: int | None = None


@dataclass(frozen=True)
class SingularityReport:
    kind: str  # "typeI", "typeII", "inconclusive", "no-singularity"
    T_est: float
    sup_product: float
    slope: float
    samples_in_decade: int


def estimate_blowup_time(times: np.ndarray, kappa_max: np.ndarray,
                         n_fit: int = 20) -> tuple[float, float]:
    """Extrapolate the singular time from the tail of 1 / kappa_max^2.

    The inverse square of the max curvature decays essentially linearly
    toward zero near a blowup (slope magnitude at least 2 for convex data);
    a linear fit of the last n_fit samples gives the zero crossing.
    """
    t = np.asarray(times, dtype=float)[-n_fit:]
    y = 1.0 / np.asarray(kappa_max, dtype=float)[-n_fit:] ** 2
    slope, intercept = np.polyfit(t, y, 1)
    if slope >= 0:
        return np.inf, float(-slope)
    return float(-intercept / slope), float(-slope)


def classify_singularity(times, kappa_max, T_est: float | None = None,
                         growth_limit: float = 0.10) -> SingularityReport:
    """Decide between type I and type II blowup from a max-curvature history.

    The product kappa_max^2 (T - t) stays bounded for type I and grows
    without bound for type II; the discriminator is its relative growth
    over the last decade of T - t.  Histories whose fitted decay slope of
    1 / kappa_max^2 is below 1 are rejected as not blowing up at all.
    """
    t = np.asarray(times, dtype=float)
    k = np.asarray(kappa_max, dtype=float)
    if len(t) < 2 or np.any(np.diff(t) <= 0):
        raise InvalidInputError("history must be non-empty with increasing times")
    slope = np.nan
    if T_est is None:
        T_est, slope = estimate_blowup_time(t, k)
        if not np.isfinite(T_est) or slope < 1.0:
            return SingularityReport(kind="no-singularity", T_est=float(T_est),
                                     sup_product=0.0, slope=float(slope),
                                     samples_in_decade=0)
    if np.any(t >= T_est):
        t_mask = t < T_est
        t, k = t[t_mask], k[t_mask]
    gap = T_est - t
    product = k**2 * gap
    d_min = gap.min()
    in_decade = gap <= 10.0 * d_min
    n_dec = int(in_decade.sum())
    sup_product = float(product[in_decade].max()) if n_dec else float("nan")
    if n_dec < 10:
        return SingularityReport(kind="inconclusive", T_est=float(T_est),
                                 sup_product=sup_product, slope=float(slope),
                                 samples_in_decade=n_dec)
    p = product[in_decade]
    g = gap[in_decade]
    early = p[g >= g.max() / np.sqrt(10.0)]
    late = p[g <= g.min() * np.sqrt(10.0)]
    growth = late.mean() / early.mean() - 1.0
    kind = "typeI" if growth < growth_limit else "typeII"
    return SingularityReport(kind=kind, T_est=float(T_est), sup_product=sup_product,
                             slope=float(slope), samples_in_decade=n_dec)


def parabolic_rescale(state, x0, T_est: float, Q: float) -> RescaledFrame:
    """Zoom by Q about the blowup point x0 with time dilated by Q^2.

    Nodes map to Q (node - x0) and the state's time t to tau = Q^2 (t - T).
    Curvature transforms as kappa / Q.
    """
    if Q <= 0:
        raise DomainError("Q must be positive")
    x0 = np.asarray(x0, dtype=float)
    curve = state.curve if hasattr(state, "curve") else state
    t = state.t if hasattr(state, "t") else 0.0
    nodes = Q * (curve.nodes - x0)
    return RescaledFrame(curve=DiscreteCurve(nodes=nodes, closed=curve.closed),
                         tau=float(Q * Q * (t - T_est)), Q=float(Q), origin=x0)


def hamilton_rescale(snapshots, j_ladder=None, T_est: float | None = None,
                     include_history: bool = True) -> list[RescaledFrame]:
    """Hamilton point-picking over stored snapshots.

    For each j the pair (node, snapshot time) maximizing
    |kappa|^2 (T - 1/j - t) is selected; the snapshot is recentered on that
    node and zoomed by Q_j = |kappa| there.  With include_history, every
    earlier snapshot is emitted in the same frame at its rescaled time
    tau = Q_j^2 (t - t_j) <= 0, where frame curvature stays bounded by 1
    up to discretization error.
    """
    snaps = list(snapshots)
    if not snaps:
        raise InvalidInputError("hamilton_rescale needs stored snapshots")
    times = np.array([s.t for s in snaps])
    kappas = [curvature(s.curve).values for s in snaps]
    if T_est is None:
        kmax = np.array([np.abs(k).max() for k in kappas])
        if len(snaps) >= 2:
            T_est, _ = estimate_blowup_time(times, kmax, n_fit=min(20, len(snaps)))
        else:
            T_est = times[-1] + 1.0
    if j_ladder is None:
        horizon = max(T_est - times[0], 1e-12)
        j_lo = max(int(np.ceil(1.0 / horizon)), 1)
        j_ladder = [j_lo * 2**m for m in range(6)]

    frames: list[RescaledFrame] = []
    for j in j_ladder:
        deadline = T_est - 1.0 / j
        usable = [i for i, t in enumerate(times) if t <= deadline]
        if not usable:
            continue
        best = None
        for i in usable:
            objective = kappas[i] ** 2 * (deadline - times[i])
            p = int(np.argmax(objective))
            if best is None or objective[p] > best[0]:
                best = (float(objective[p]), i, p)
        _, i_star, p_star = best
        Qj = float(np.abs(kappas[i_star][p_star]))
        if Qj <= 0:
            continue
        origin = snaps[i_star].curve.nodes[p_star].copy()
        t_j = times[i_star]
        members = [i for i in usable if times[i] <= t_j] if include_history else [i_star]
        for i in members:
            nodes = Qj * (snaps[i].curve.nodes - origin)
            frames.append(RescaledFrame(
                curve=DiscreteCurve(nodes=nodes, closed=snaps[i].curve.closed),
                tau=float(Qj * Qj * (times[i] - t_j)), Q=Qj, origin=origin,
                center_node=p_star if i == i_star else None, j=int(j)))
    return frames


def self_shrinker_residual(frame: RescaledFrame) -> tuple[np.ndarray, float]:
    """Deviation from the homothetic-shrinking equation kappa = <x, nu> / (2 tau).

    Returns the per-node residual and its L2 norm by arclength.  Zero for
    the unit circle at tau = -1/2 and for lines through the origin.
    """
    if frame.tau >= 0:
        raise DomainError("self-shrinker residual requires tau < 0")
    samples = curvature(frame.curve)
    nu = node_normals(frame.curve)
    xdotnu = np.sum(frame.curve.nodes * nu, axis=1)
    resid = samples.values - xdotnu / (2.0 * frame.tau)
    l2 = float(np.sqrt((resid**2 * samples.weights).sum()))
    return resid, l2


def grim_reaper(tau: float, y_window: tuple[float, float] = (-1.3, 1.3),
                n: int = 256) -> DiscreteCurve:
    """Sample of the translating-soliton graph x = -log cos y + tau.

    Nodes are ordered by decreasing y so curvature is +cos y; the window
    must stay at least 0.05 away from the asymptotes at +-pi/2.
    """
    y_lo, y_hi = min(y_window), max(y_window)
    if y_lo <= -np.pi / 2 + 0.05 or y_hi >= np.pi / 2 - 0.05:
        raise DomainError("window must stay 0.05 inside (-pi/2, pi/2)")
    y = np.linspace(y_hi, y_lo, n)
    x = -np.log(np.cos(y)) + tau
    return DiscreteCurve(nodes=np.stack([x, y], axis=1))


@dataclass(frozen=True)
class ArcFit:
    """Least-squares circle through the nodes, with endpoint contact angles."""

    center: np.ndarray
    radius: float
    rms_error: float
    contact_angles: tuple[float, float] | None
    is_line: bool


def fit_circular_arc(curve: DiscreteCurve, line_radius: float = 1e8) -> ArcFit:
    """Algebraic circle fit refined by one geometric Gauss-Newton step.

    Nearly collinear inputs report is_line instead of an absurd radius.
    The contact report gives the angles between the endpoint tangents and
    the radius directions there (pi/2 for a true arc).
    """
    P = curve.nodes
    scale = float(np.abs(P - P.mean(axis=0)).max()) or 1.0
    M = np.column_stack([2.0 * P[:, 0], 2.0 * P[:, 1], np.ones(len(P))])
    rhs = P[:, 0] ** 2 + P[:, 1] ** 2
    sol, residues, rank, sv = np.linalg.lstsq(M, rhs, rcond=None)
    if rank < 3 or sv[-1] < 1e-12 * sv[0]:
        return ArcFit(center=np.full(2, np.nan), radius=np.inf, rms_error=np.nan,
                      contact_angles=None, is_line=True)
    cx, cy, c0 = sol
    r = float(np.sqrt(c0 + cx * cx + cy * cy))
    center = np.array([cx, cy])
    if r > line_radius * scale:
        return ArcFit(center=center, radius=np.inf, rms_error=np.nan,
                      contact_angles=None, is_line=True)
    # one Gauss-Newton step on the geometric distances
    for _ in range(1):
        d = P - center
        dist = np.hypot(d[:, 0], d[:, 1])
        res = dist - r
        Jac = np.column_stack([-d[:, 0] / dist, -d[:, 1] / dist, -np.ones(len(P))])
        upd, *_ = np.linalg.lstsq(Jac, -res, rcond=None)
        center = center + upd[:2]
        r = r + upd[2]
    d = P - center
    dist = np.hypot(d[:, 0], d[:, 1])
    rms = float(np.sqrt(np.mean((dist - r) ** 2)))
    contact = None
    if not curve.closed:
        from .curve import node_tangents
        tg = node_tangents(curve)
        angles = []
        for i in (0, -1):
            radial = d[i] / dist[i]
            cosang = np.clip(tg[i] @ radial, -1.0, 1.0)
            angles.append(float(np.arccos(cosang)))
        contact = (angles[0], angles[1])
    return ArcFit(center=center, radius=float(r), rms_error=rms,
                  contact_angles=contact, is_line=False)
