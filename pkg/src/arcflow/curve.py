"""Discrete planar curves and purely geometric queries.

A curve is an ordered polyline of nodes in the plane, open or closed.
The orientation convention is ``nu = J tau`` with ``J`` the rotation by
+pi/2, so a positively oriented (counterclockwise) circle has curvature
+1/R and its normal points toward the center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidCurveError


def rot90(v: np.ndarray) -> np.ndarray:
    """Rotate vectors by +pi/2 (the J operator): (x, y) -> (-y, x)."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


@dataclass(frozen=True)
class DiscreteCurve:
    """Ordered polyline sample of a planar curve.

    Parameters
    ----------
    nodes : (n, 2) array
        Node coordinates in traversal order.  For closed curves the first
        node must not be repeated at the end.
    closed : bool
        Whether the last node connects back to the first.
    """

    nodes: np.ndarray
    closed: bool = False

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise InvalidCurveError(f"nodes must have shape (n, 2), got {nodes.shape}")
        if not np.isfinite(nodes).all():
            raise InvalidCurveError("nodes contain non-finite coordinates")
        nmin = 3 if self.closed else 2
        if len(nodes) < nmin:
            raise InvalidCurveError(
                f"{'closed' if self.closed else 'open'} curve needs >= {nmin} nodes, "
                f"got {len(nodes)}")
        seg = np.diff(nodes, axis=0)
        lens = np.hypot(seg[:, 0], seg[:, 1])
        if self.closed:
            lens = np.append(lens, np.hypot(*(nodes[0] - nodes[-1])))
        if np.any(lens <= 0.0):
            raise InvalidCurveError("consecutive nodes must be distinct")
        object.__setattr__(self, "nodes", nodes)

    @property
    def n(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class CurvatureSamples:
    """Per-node signed curvature with trapezoidal arclength weights.

    The weights are positive and sum to the discrete curve length, so
    ``(values * weights).sum()`` is the discrete integral of curvature.
    """

    values: np.ndarray
    weights: np.ndarray

    @property
    def length(self) -> float:
        return float(self.weights.sum())

    def integral(self) -> float:
        return float((self.values * self.weights).sum())


def segment_lengths(curve: DiscreteCurve) -> np.ndarray:
    """Lengths of the polyline segments (includes the closing segment if closed)."""
    d = np.diff(curve.nodes, axis=0)
    lens = np.hypot(d[:, 0], d[:, 1])
    if curve.closed:
        lens = np.append(lens, np.hypot(*(curve.nodes[0] - curve.nodes[-1])))
    return lens


def arclength_table(curve: DiscreteCurve) -> np.ndarray:
    """Cumulative arclength at each node, starting at 0.

    For open curves the last entry equals the polyline length.  For closed
    curves the table has one entry per node; the closing segment is part of
    :func:`polyline_length` but not of the table.
    """
    lens = segment_lengths(curve)
    if curve.closed:
        lens = lens[:-1]
    return np.concatenate([[0.0], np.cumsum(lens)])


def polyline_length(curve: DiscreteCurve) -> float:
    """Total polyline length (closing segment included for closed curves)."""
    return float(segment_lengths(curve).sum())


def _menger(A: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Signed Menger curvature of point triples: 1/R of the circumcircle.

    Positive for left turns (counterclockwise triples).  Collinear triples
    give exactly 0.
    """
    ab = B - A
    bc = C - B
    ca = A - C
    cross = ab[..., 0] * bc[..., 1] - ab[..., 1] * bc[..., 0]
    denom = (np.hypot(ab[..., 0], ab[..., 1])
             * np.hypot(bc[..., 0], bc[..., 1])
             * np.hypot(ca[..., 0], ca[..., 1]))
    return 2.0 * cross / denom


def _endpoint_fit(nodes: np.ndarray, s: np.ndarray, at_start: bool, k: int = 4):
    """Cubic interpolation of (x, y) against arclength at an open endpoint.

    Returns (kappa, tangent) at the endpoint.  Interpolating k = 4 nodes
    gives a second-order accurate one-sided second derivative.
    """
    n = len(nodes)
    k = min(k, n)
    idx = np.arange(k) if at_start else np.arange(n - k, n)
    s0 = s[idx[0]] if at_start else s[idx[-1]]
    ss = s[idx] - s0
    V = np.vander(ss, k, increasing=True)
    cx = np.linalg.solve(V, nodes[idx, 0])
    cy = np.linalg.solve(V, nodes[idx, 1])
    if k >= 3:
        x1, y1, x2, y2 = cx[1], cy[1], 2.0 * cx[2], 2.0 * cy[2]
    else:
        x1, y1, x2, y2 = cx[1], cy[1], 0.0, 0.0
    speed = np.hypot(x1, y1)
    kappa = (x1 * y2 - y1 * x2) / speed**3
    tangent = np.array([x1, y1]) / speed
    return kappa, tangent


def curvature(curve: DiscreteCurve) -> CurvatureSamples:
    """Signed curvature at every node.

    Interior nodes use the Menger circumcircle of three consecutive nodes,
    which is exact on circles.  Open-curve endpoints use a one-sided cubic
    fit against arclength.  Collinear triples report curvature 0.
    """
    P = curve.nodes
    n = curve.n
    kap = np.empty(n)
    if curve.closed:
        Pe = np.vstack([P[-1:], P, P[:1]])
        kap[:] = _menger(Pe[:-2], Pe[1:-1], Pe[2:])
    else:
        if n < 4:
            raise InvalidCurveError("curvature of an open curve needs >= 4 nodes")
        kap[1:-1] = _menger(P[:-2], P[1:-1], P[2:])
        s = arclength_table(curve)
        kap[0], _ = _endpoint_fit(P, s, at_start=True)
        kap[-1], _ = _endpoint_fit(P, s, at_start=False)
    lens = segment_lengths(curve)
    w = np.empty(n)
    if curve.closed:
        w[:] = (np.roll(lens, 1) + lens) / 2.0
    else:
        w[0] = lens[0] / 2.0
        w[-1] = lens[-1] / 2.0
        w[1:-1] = (lens[:-1] + lens[1:]) / 2.0
    return CurvatureSamples(values=kap, weights=w)


def node_tangents(curve: DiscreteCurve) -> np.ndarray:
    """Unit tangent at each node (central chords; cubic fit at open endpoints)."""
    P = curve.nodes
    t = np.empty_like(P)
    if curve.closed:
        t[:] = np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)
    else:
        t[1:-1] = P[2:] - P[:-2]
        s = arclength_table(curve)
        _, t[0] = _endpoint_fit(P, s, at_start=True)
        _, t[-1] = _endpoint_fit(P, s, at_start=False)
    return t / np.hypot(t[:, 0], t[:, 1])[:, None]


def node_normals(curve: DiscreteCurve) -> np.ndarray:
    """Unit normal nu = J tau at each node."""
    return rot90(node_tangents(curve))


def total_turning(curve: DiscreteCurve) -> float:
    """Total signed turning of an open polyline.

    Sum of the signed exterior angles between consecutive segments; this is
    the discrete version of the integral of curvature by arclength.
    """
    if curve.closed:
        raise InvalidCurveError("total_turning is defined for open curves")
    d = np.diff(curve.nodes, axis=0)
    ang = np.arctan2(d[:, 1], d[:, 0])
    turns = np.diff(ang)
    turns = np.mod(turns + np.pi, 2.0 * np.pi) - np.pi
    return float(turns.sum())


def self_intersects(curve: DiscreteCurve, eps: float = 1e-12) -> bool:
    """True iff two non-adjacent segments of the polyline intersect.

    Uses orientation predicates on segment endpoints; touching at a shared
    polyline vertex does not count.
    """
    P = curve.nodes
    if curve.closed:
        A = P
        B = np.roll(P, -1, axis=0)
    else:
        A = P[:-1]
        B = P[1:]
    m = len(A)
    scale = max(float(np.abs(P).max()), 1.0)
    tol = eps * scale * scale

    def orient(p, q, r):
        return ((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    for i in range(m - 1):
        j0 = i + 2
        j1 = m if not (curve.closed and i == 0) else m - 1
        if j0 >= j1:
            continue
        a, b = A[i], B[i]
        c, d = A[j0:j1], B[j0:j1]
        d1 = orient(a, b, c)
        d2 = orient(a, b, d)
        d3 = orient(c, d, a[None, :].repeat(len(c), 0))
        d4 = orient(c, d, b[None, :].repeat(len(c), 0))
        proper = (d1 * d2 < -tol) & (d3 * d4 < -tol)
        if proper.any():
            return True
        # collinear overlap: check bounding-box intersection of degenerate cases
        flat = (np.abs(d1) <= tol) & (np.abs(d2) <= tol)
        if flat.any():
            cs, ds = c[flat], d[flat]
            lo = np.minimum(cs, ds)
            hi = np.maximum(cs, ds)
            alo = np.minimum(a, b)
            ahi = np.maximum(a, b)
            overlap = (lo[:, 0] <= ahi[0] + tol) & (alo[0] <= hi[:, 0] + tol) \
                & (lo[:, 1] <= ahi[1] + tol) & (alo[1] <= hi[:, 1] + tol)
            if overlap.any():
                return True
    return False


def resample_uniform(curve: DiscreteCurve, n: int) -> DiscreteCurve:
    """Resample at n nodes equally spaced in arclength along the polyline.

    Open curves keep their endpoints exactly; closed curves keep the first
    node and space the rest around the full perimeter.
    """
    if n < (3 if curve.closed else 2):
        raise InvalidCurveError(f"cannot resample to {n} nodes")
    P = curve.nodes
    if curve.closed:
        Pw = np.vstack([P, P[:1]])
        s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(Pw, axis=0).T))])
        snew = np.linspace(0.0, s[-1], n, endpoint=False)
    else:
        Pw = P
        s = arclength_table(curve)
        snew = np.linspace(0.0, s[-1], n)
    x = np.interp(snew, s, Pw[:, 0])
    y = np.interp(snew, s, Pw[:, 1])
    Q = np.stack([x, y], axis=1)
    Q[0] = P[0]
    if not curve.closed:
        Q[-1] = P[-1]
    return DiscreteCurve(nodes=Q, closed=curve.closed)


def translated(curve: DiscreteCurve, vec) -> DiscreteCurve:
    return DiscreteCurve(nodes=curve.nodes + np.asarray(vec, dtype=float),
                         closed=curve.closed)


def rotated(curve: DiscreteCurve, angle: float, about=(0.0, 0.0)) -> DiscreteCurve:
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s], [s, c]])
    about = np.asarray(about, dtype=float)
    return DiscreteCurve(nodes=(curve.nodes - about) @ R.T + about, closed=curve.closed)


def scaled(curve: DiscreteCurve, factor: float, about=(0.0, 0.0)) -> DiscreteCurve:
    about = np.asarray(about, dtype=float)
    return DiscreteCurve(nodes=(curve.nodes - about) * factor + about, closed=curve.closed)


def reversed_curve(curve: DiscreteCurve) -> DiscreteCurve:
    return DiscreteCurve(nodes=curve.nodes[::-1].copy(), closed=curve.closed)


def curve_to_json(curve: DiscreteCurve) -> dict:
    """Serialize to the wire format: node pairs plus a closed flag."""
    return {"nodes": curve.nodes.tolist(), "closed": bool(curve.closed)}


def curve_from_json(obj: dict) -> DiscreteCurve:
    try:
        nodes = obj["nodes"]
        closed = bool(obj.get("closed", False))
    except (KeyError, TypeError) as exc:
        raise InvalidCurveError(f"malformed curve object: {exc}") from exc
    return DiscreteCurve(nodes=np.asarray(nodes, dtype=float), closed=closed)
