"""Construction of initial curves attached orthogonally to a circular support."""

from __future__ import annotations

import numpy as np

from .curve import DiscreteCurve
from .errors import DomainError, InvalidInputError
from .support import BoundaryLift, CircleSupport, SupportCurve


def _require_circle(sigma: SupportCurve) -> CircleSupport:
    if not isinstance(sigma, CircleSupport):
        raise DomainError("arc initial data is only constructed on circle supports; "
                          "use an explicit node list for other shapes")
    return sigma


def orthogonal_arc(sigma: SupportCurve, rho: float, n: int,
                   center_angle: float = 0.0) -> tuple[DiscreteCurve, BoundaryLift]:
    """Circular arc of radius rho meeting the circle support orthogonally.

    The arc's center sits at distance sqrt(R^2 + rho^2) from the origin in
    the direction ``center_angle``; the exterior part of the arc is sampled
    with n nodes, traversed counterclockwise so curvature is +1/rho.  This
    family is pointwise stationary under the area-preserving flow.
    """
    circ = _require_circle(sigma)
    R = circ.radius
    if rho <= 0:
        raise DomainError("rho must be positive")
    d = np.hypot(R, rho)
    # angular half-width of the exterior arc, seen from the arc center
    th_star = np.arccos(-rho / d)
    th = np.linspace(-th_star, th_star, n)
    local = rho * np.stack([np.cos(th), np.sin(th)], axis=1)
    ca, sa = np.cos(center_angle), np.sin(center_angle)
    rot = np.array([[ca, -sa], [sa, ca]])
    nodes = (np.array([d, 0.0]) + local) @ rot.T
    lift = _lift_from_endpoints(circ, nodes)
    return DiscreteCurve(nodes=nodes), lift


def perturbed_arc(sigma: SupportCurve, rho: float, amplitude: float,
                  oscillations: int, seed: int, n: int,
                  center_angle: float = 0.0) -> tuple[DiscreteCurve, BoundaryLift]:
    """Radially perturbed orthogonal arc with contact conditions preserved.

    The radius profile is rho * (1 + bump) where the bump is a seeded random
    mixture of ``1 - cos(2 pi k x)`` modes, k = 1..oscillations, normalized
    to the requested relative amplitude.  These modes vanish to first order
    at the endpoints, so the perturbed curve still touches the support at
    the unperturbed points with exactly orthogonal contact.
    """
    circ = _require_circle(sigma)
    if not 0 <= amplitude < 1:
        raise DomainError("amplitude must be in [0, 1)")
    if oscillations < 1:
        raise DomainError("need at least one oscillation mode")
    R = circ.radius
    d = np.hypot(R, rho)
    th_star = np.arccos(-rho / d)
    th = np.linspace(-th_star, th_star, n)
    x = (th + th_star) / (2.0 * th_star)
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.3, 1.0, oscillations) * rng.choice([-1.0, 1.0], oscillations)
    bump = np.zeros_like(x)
    for k in range(1, oscillations + 1):
        bump += weights[k - 1] * (1.0 - np.cos(2.0 * np.pi * k * x)) / 2.0
    peak = np.max(np.abs(bump))
    if peak > 0:
        bump *= amplitude / peak
    r = rho * (1.0 + bump)
    local = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    ca, sa = np.cos(center_angle), np.sin(center_angle)
    rot = np.array([[ca, -sa], [sa, ca]])
    nodes = (np.array([d, 0.0]) + local) @ rot.T
    lift = _lift_from_endpoints(circ, nodes)
    return DiscreteCurve(nodes=nodes), lift


def _lift_from_endpoints(sigma: SupportCurve, nodes: np.ndarray) -> BoundaryLift:
    a = sigma.project(nodes[0])
    b = sigma.project(nodes[-1])
    if b <= a:
        b += sigma.total_length
    return BoundaryLift(a=a, b=b)


def attach_endpoints(sigma: SupportCurve, curve: DiscreteCurve,
                     tol: float = 1e-6) -> BoundaryLift:
    """Build the boundary lift for an open curve whose endpoints lie on the support."""
    if curve.closed:
        raise InvalidInputError("closed curves have no boundary lift")
    diam = sigma.metrics().diameter
    lift = _lift_from_endpoints(sigma, curve.nodes)
    for node, s in ((curve.nodes[0], lift.a), (curve.nodes[-1], lift.b)):
        if np.hypot(*(node - sigma.point(s))) > tol * diam:
            raise InvalidInputError("curve endpoints do not lie on the support")
    return lift
