"""Shared curve builders for the test suite."""

import numpy as np

from arcflow import DiscreteCurve


def circle_nodes(n, radius=1.0, center=(0.0, 0.0), clockwise=False):
    th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    if clockwise:
        th = -th
    return np.asarray(center) + radius * np.stack([np.cos(th), np.sin(th)], axis=1)


def closed_circle(n, radius=1.0, center=(0.0, 0.0), clockwise=False):
    return DiscreteCurve(nodes=circle_nodes(n, radius, center, clockwise), closed=True)


def open_arc(n, radius=1.0, center=(0.0, 0.0), angle0=0.0, angle1=np.pi):
    th = np.linspace(angle0, angle1, n)
    nodes = np.asarray(center) + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    return DiscreteCurve(nodes=nodes)


def arc_with_exact_turning(turning, n, radius=1.0):
    """Open polyline whose discrete turning is exactly the given angle.

    A regular sample of an arc of angle T has discrete turning T (n-2)/(n-1),
    so the underlying arc is widened by the reciprocal factor.
    """
    span = turning * (n - 1) / (n - 2)
    th = np.linspace(0.0, span, n)
    nodes = radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    return DiscreteCurve(nodes=nodes)


def segment(n, p0=(0.0, 0.0), p1=(1.0, 0.0)):
    t = np.linspace(0.0, 1.0, n)[:, None]
    nodes = np.asarray(p0) * (1 - t) + np.asarray(p1) * t
    return DiscreteCurve(nodes=nodes)


def figure_eight(n=41):
    t = np.linspace(0.0, 2.0 * np.pi, n)
    nodes = np.stack([np.sin(2 * t), np.sin(t)], axis=1)
    # drop duplicate consecutive points if any
    keep = np.ones(len(nodes), dtype=bool)
    keep[1:] = np.hypot(*np.diff(nodes, axis=0).T) > 1e-12
    return DiscreteCurve(nodes=nodes[keep])


def hausdorff_to_circle(curve, center, radius):
    """Max distance of the nodes from the circle of given center and radius."""
    d = np.hypot(curve.nodes[:, 0] - center[0], curve.nodes[:, 1] - center[1])
    return float(np.abs(d - radius).max())
