"""The fixed convex support curve and boundary-lift bookkeeping.

Supports are closed, simple, positively oriented convex curves given by
arclength parameter.  With the J-rotation convention the support normal
``nu = J tau`` points into the bounded domain enclosed by the curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curve import rot90
from .errors import DomainError, InvalidSupportError

_CONVEXITY_TOL = 1e-8


@dataclass(frozen=True)
class SupportMetrics:
    """Geometric constants of the support: max curvature, minimal width, diameter."""

    kappa_max: float
    sigma_d: float
    diameter: float


@dataclass(frozen=True)
class BoundaryLift:
    """Arclength parameters of the two curve endpoints on the periodic support.

    ``a`` locates the start point and ``b`` the end point with ``b > a``;
    ``b - a`` is the length of the boundary arc between them.
    """

    a: float
    b: float

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def collided(self) -> bool:
        return self.width <= 0.0


def advance_lift(lift: BoundaryLift, kappa_a: float, kappa_b: float,
                 kappa_bar: float, dt: float) -> BoundaryLift:
    """Integrate the endpoint parameters one Euler step along the support.

    The start parameter moves with speed ``kappa_a - kappa_bar`` and the end
    parameter with the opposite-signed law ``-(kappa_b - kappa_bar)``.  The
    returned lift has ``collided`` set if the endpoints met or crossed.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    return BoundaryLift(a=lift.a + dt * (kappa_a - kappa_bar),
                        b=lift.b - dt * (kappa_b - kappa_bar))


class SupportCurve:
    """Base class: arclength-parametrized convex closed curve.

    Subclasses provide ``total_length``, ``point``, ``tangent`` and
    ``curvature`` (all accepting scalar or array parameters, taken modulo
    the total length).  Normals, projection, metrics and arc sampling are
    derived here.
    """

    total_length: float

    # -- parametric evaluation -------------------------------------------
    def point(self, s):
        raise NotImplementedError

    def tangent(self, s):
        raise NotImplementedError

    def curvature(self, s):
        raise NotImplementedError

    def normal(self, s):
        return rot90(self.tangent(s))

    def frame(self, s: float):
        """Evaluate (point, tangent, normal, curvature) at one parameter."""
        return (self.point(s), self.tangent(s), self.normal(s),
                float(np.asarray(self.curvature(s))))

    # -- signed position relative to the curve ---------------------------
    def signed_inset(self, q) -> float:
        """Distance of q to the curve, negative outside, positive inside."""
        s = self._project_any(q)
        d = np.asarray(q, dtype=float) - self.point(s)
        return float(d @ self.normal(s))

    def project(self, q) -> float:
        """Arclength parameter of the closest support point to q.

        q must lie on the curve or outside the enclosed domain; strictly
        inside points raise DomainError.
        """
        s = self._project_any(q)
        inset = (np.asarray(q, dtype=float) - self.point(s)) @ self.normal(s)
        if inset > 1e-9 * self.metrics().diameter:
            raise DomainError("projection target lies strictly inside the support")
        return s

    def _project_any(self, q) -> float:
        """Projection without the outside-only domain restriction."""
        raise NotImplementedError

    # -- derived quantities ----------------------------------------------
    def tangent_angle(self, s):
        """Tangent direction angle, unwrapped to be increasing over one period."""
        s = np.mod(s, self.total_length)
        base = np.interp(s, self._dense_s, self._dense_phi)
        return base

    def arc_turning(self, s0: float, s1: float) -> float:
        """Total turning of the support tangent along the arc from s0 to s1."""
        if s1 < s0:
            raise DomainError("arc_turning needs s1 >= s0")
        k, r0 = divmod(s0, self.total_length)
        r1 = s1 - k * self.total_length
        full, r1 = divmod(r1, self.total_length)
        phi0 = np.interp(r0, self._dense_s, self._dense_phi)
        phi1 = np.interp(r1, self._dense_s, self._dense_phi)
        return float(phi1 - phi0 + 2.0 * np.pi * full)

    def arc_points(self, s0: float, s1: float, spacing: float | None = None) -> np.ndarray:
        """Sample the arc from s0 to s1 at roughly the dense-table resolution."""
        if spacing is None:
            spacing = self.total_length / self._dense_n
        # small slack so the count is stable under last-ulp width changes
        m = max(int(np.ceil((s1 - s0) / spacing - 1e-9)), 1) + 1
        return self.point(np.linspace(s0, s1, m))

    _dense_n = 4096

    @cached_property
    def _dense_s(self) -> np.ndarray:
        return np.linspace(0.0, self.total_length, self._dense_n + 1)

    @cached_property
    def _dense_phi(self) -> np.ndarray:
        t = self.tangent(self._dense_s)
        phi = np.arctan2(t[:, 1], t[:, 0])
        return np.unwrap(phi)

    def metrics(self) -> SupportMetrics:
        """Max curvature, minimal width (antipodal-tangent distance), diameter."""
        return self._metrics

    @cached_property
    def _metrics(self) -> SupportMetrics:
        s = self._dense_s
        kap = np.asarray(self.curvature(s))
        if np.any(kap < -_CONVEXITY_TOL):
            raise InvalidSupportError("support curve is not convex")
        kappa_max = _refine_max(lambda u: float(np.asarray(self.curvature(u))),
                                s, kap)
        sigma_d = self._minimal_width()
        pts = self.point(s[:-1])
        diameter = _polygon_diameter(pts)
        return SupportMetrics(kappa_max=kappa_max, sigma_d=sigma_d, diameter=diameter)

    def _minimal_width(self) -> float:
        """Min distance over point pairs with anti-parallel tangents.

        The unwrapped tangent angle of a convex curve is monotone, so the
        antipodal partner s*(s) with phi(s*) = phi(s) + pi is found by
        inverse interpolation, then the width is minimized over s.
        """
        s = self._dense_s
        phi = self._dense_phi
        phi_ext = np.concatenate([phi, phi[1:] + 2.0 * np.pi])
        s_ext = np.concatenate([s, s[1:] + self.total_length])

        def width(u):
            pu = np.interp(u, s, phi)
            u_star = np.interp(pu + np.pi, phi_ext, s_ext)
            d = np.asarray(self.point(u_star)) - np.asarray(self.point(u))
            return np.hypot(d[..., 0], d[..., 1])

        w = width(s[:-1])
        i = int(np.argmin(w))
        lo = s[max(i - 1, 0)]
        hi = s[min(i + 1, len(s) - 1)]
        return float(_golden_min(lambda u: float(width(u)), lo, hi, tol=1e-8)[1])


def _golden_min(fun, lo, hi, tol):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    u = (a + b) / 2.0
    return u, fun(u)


def _refine_max(fun, s, values):
    i = int(np.argmax(values))
    lo = s[max(i - 1, 0)]
    hi = s[min(i + 1, len(s) - 1)]
    return -_golden_min(lambda u: -fun(u), lo, hi, tol=1e-10)[1]


def _polygon_diameter(pts: np.ndarray) -> float:
    if len(pts) > 1024:
        step = len(pts) // 1024
        sub = pts[::step]
    else:
        sub = pts
    d2 = np.sum((sub[:, None, :] - sub[None, :, :]) ** 2, axis=-1)
    i, j = np.unravel_index(np.argmax(d2), d2.shape)
    # local refinement on the full sample around the coarse maximizer
    besti = int(np.argmax(np.sum((pts - sub[j]) ** 2, axis=1)))
    bestj = int(np.argmax(np.sum((pts - pts[besti]) ** 2, axis=1)))
    return float(np.hypot(*(pts[besti] - pts[bestj])))


class CircleSupport(SupportCurve):
    """Circle of given radius centered at the origin, positively oriented."""

    def __init__(self, radius: float):
        if radius <= 0:
            raise InvalidSupportError("radius must be positive")
        self.radius = float(radius)
        self.total_length = 2.0 * np.pi * self.radius

    def _angles(self, s):
        return np.asarray(s, dtype=float) / self.radius

    def point(self, s):
        th = self._angles(s)
        return np.stack([self.radius * np.cos(th), self.radius * np.sin(th)], axis=-1)

    def tangent(self, s):
        th = self._angles(s)
        return np.stack([-np.sin(th), np.cos(th)], axis=-1)

    def curvature(self, s):
        return np.full_like(np.asarray(s, dtype=float), 1.0 / self.radius)

    def _project_any(self, q) -> float:
        q = np.asarray(q, dtype=float)
        if np.hypot(*q) == 0.0:
            raise DomainError("projection undefined at the circle center")
        th = np.arctan2(q[1], q[0]) % (2.0 * np.pi)
        return float(self.radius * th)


class EllipseSupport(SupportCurve):
    """Axis-aligned origin-centered ellipse with semi-axes a (x) and b (y)."""

    _table_n = 16384

    def __init__(self, a: float, b: float):
        if a <= 0 or b <= 0:
            raise InvalidSupportError("semi-axes must be positive")
        self.a = float(a)
        self.b = float(b)
        th = np.linspace(0.0, 2.0 * np.pi, self._table_n + 1)
        speed = np.hypot(self.a * np.sin(th), self.b * np.cos(th))
        ds = np.diff(th) * (speed[:-1] + speed[1:]) / 2.0
        self._theta_grid = th
        self._s_grid = np.concatenate([[0.0], np.cumsum(ds)])
        self.total_length = float(self._s_grid[-1])

    def _theta(self, s):
        s = np.mod(np.asarray(s, dtype=float), self.total_length)
        th = np.interp(s, self._s_grid, self._theta_grid)
        # Newton refinement on the tabulated arclength antiderivative
        for _ in range(3):
            sp = np.hypot(self.a * np.sin(th), self.b * np.cos(th))
            s_of = np.interp(th, self._theta_grid, self._s_grid)
            th = th - (s_of - s) / sp
        return th

    def point(self, s):
        th = self._theta(s)
        return np.stack([self.a * np.cos(th), self.b * np.sin(th)], axis=-1)

    def tangent(self, s):
        th = self._theta(s)
        tx = -self.a * np.sin(th)
        ty = self.b * np.cos(th)
        sp = np.hypot(tx, ty)
        return np.stack([tx / sp, ty / sp], axis=-1)

    def curvature(self, s):
        th = self._theta(s)
        sp = np.hypot(self.a * np.sin(th), self.b * np.cos(th))
        return self.a * self.b / sp**3

    def _project_any(self, q) -> float:
        q = np.asarray(q, dtype=float)
        th_grid = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
        pts = np.stack([self.a * np.cos(th_grid), self.b * np.sin(th_grid)], axis=1)
        th = th_grid[int(np.argmin(np.sum((pts - q) ** 2, axis=1)))]
        for _ in range(60):
            f = np.array([self.a * np.cos(th), self.b * np.sin(th)])
            fp = np.array([-self.a * np.sin(th), self.b * np.cos(th)])
            fpp = np.array([-self.a * np.cos(th), -self.b * np.sin(th)])
            g = (q - f) @ fp
            gp = (q - f) @ fpp - fp @ fp
            if gp == 0.0:
                break
            step = g / gp
            th -= step
            if abs(step) < 1e-15:
                break
        th %= 2.0 * np.pi
        return float(np.interp(th, self._theta_grid, self._s_grid))


class TableSupport(SupportCurve):
    """Support given by a dense closed sample of points (convex, positively oriented)."""

    def __init__(self, points: np.ndarray):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 8:
            raise InvalidSupportError("table support needs an (m, 2) array, m >= 8")
        if np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        seg = np.roll(pts, -1, axis=0) - pts
        lens = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(lens <= 0):
            raise InvalidSupportError("table support has duplicate consecutive points")
        self._pts = pts
        self._s = np.concatenate([[0.0], np.cumsum(lens)])
        self.total_length = float(self._s[-1])
        chord = np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)
        self._tan = chord / np.hypot(chord[:, 0], chord[:, 1])[:, None]
        A, B, C = np.roll(pts, 1, axis=0), pts, np.roll(pts, -1, axis=0)
        ab = B - A
        bc = C - B
        ca = A - C
        cross = ab[:, 0] * bc[:, 1] - ab[:, 1] * bc[:, 0]
        self._kap = 2.0 * cross / (np.hypot(*ab.T) * np.hypot(*bc.T) * np.hypot(*ca.T))
        if np.any(self._kap < -_CONVEXITY_TOL):
            raise InvalidSupportError("table support is not convex")
        if np.sum(self._kap * (np.roll(lens, 1) + lens) / 2.0) < 0:
            raise InvalidSupportError("table support must be positively oriented")

    def _wrap(self, s):
        return np.mod(np.asarray(s, dtype=float), self.total_length)

    def point(self, s):
        # self._s has n+1 entries (node arclengths plus the full perimeter)
        s = self._wrap(s)
        pw = np.vstack([self._pts, self._pts[:1]])
        x = np.interp(s, self._s, pw[:, 0])
        y = np.interp(s, self._s, pw[:, 1])
        return np.stack([x, y], axis=-1)

    def tangent(self, s):
        s = self._wrap(s)
        tw = np.vstack([self._tan, self._tan[:1]])
        tx = np.interp(s, self._s, tw[:, 0])
        ty = np.interp(s, self._s, tw[:, 1])
        t = np.stack([tx, ty], axis=-1)
        return t / np.hypot(tx, ty)[..., None]

    def curvature(self, s):
        s = self._wrap(s)
        kw = np.concatenate([self._kap, self._kap[:1]])
        return np.interp(s, self._s, kw)

    def _project_any(self, q) -> float:
        q = np.asarray(q, dtype=float)
        pts = self._pts
        nxt = np.roll(pts, -1, axis=0)
        seg = nxt - pts
        seglen2 = np.sum(seg**2, axis=1)
        tpar = np.clip(np.sum((q - pts) * seg, axis=1) / seglen2, 0.0, 1.0)
        foot = pts + tpar[:, None] * seg
        d2 = np.sum((q - foot) ** 2, axis=1)
        i = int(np.argmin(d2))
        return float((self._s[i] + tpar[i] * np.sqrt(seglen2[i])) % self.total_length)


def support_from_config(obj: dict) -> SupportCurve:
    """Build a support from its wire format: circle, ellipse or point table."""
    try:
        kind = obj["kind"]
    except (KeyError, TypeError) as exc:
        raise InvalidSupportError(f"support config needs a 'kind': {exc}") from exc
    if kind == "circle":
        return CircleSupport(radius=float(obj["radius"]))
    if kind == "ellipse":
        return EllipseSupport(a=float(obj["a"]), b=float(obj["b"]))
    if kind == "table":
        return TableSupport(points=np.asarray(obj["points"], dtype=float))
    raise InvalidSupportError(f"unknown support kind {kind!r}")
