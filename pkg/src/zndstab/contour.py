"""Piecewise-smooth contours in the complex x-plane and quadrature on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profile import FlowPoint, Profile, continue_profile_complex


@dataclass(frozen=True)
class Line:
    a: complex
    b: complex

    def point(self, t):
        return self.a + (self.b - self.a) * np.asarray(t)

    def deriv(self, t):
        return (self.b - self.a) * np.ones_like(np.asarray(t, dtype=float))

    @property
    def length(self):
        return abs(self.b - self.a)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    th0: float
    th1: float  # th1 < th0 means clockwise

    def point(self, t):
        th = self.th0 + (self.th1 - self.th0) * np.asarray(t)
        return self.center + self.radius * np.exp(1j * th)

    def deriv(self, t):
        th = self.th0 + (self.th1 - self.th0) * np.asarray(t)
        return 1j * (self.th1 - self.th0) * self.radius * np.exp(1j * th)

    @property
    def length(self):
        return abs(self.th1 - self.th0) * self.radius


@dataclass(frozen=True)
class ContourNodes:
    z: np.ndarray  # node positions
    w: np.ndarray  # complex weights (dz) so that sum(f(z) w) ~ integral
    seg: np.ndarray
    t: np.ndarray


@dataclass(frozen=True)
class Contour:
    segments: tuple

    @property
    def start(self) -> complex:
        return complex(self.segments[0].point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.segments[-1].point(1.0))

    @property
    def length(self) -> float:
        return float(sum(s.length for s in self.segments))

    def nodes(self, order: int = 16, panel_len: float = 0.05, min_panels: int = 2) -> ContourNodes:
        xg, wg = np.polynomial.legendre.leggauss(order)
        zs, ws, sg, ts = [], [], [], []
        for k, seg in enumerate(self.segments):
            if seg.length == 0:
                continue
            npan = max(min_panels, int(np.ceil(seg.length / panel_len)))
            edges = np.linspace(0.0, 1.0, npan + 1)
            for a, b in zip(edges[:-1], edges[1:]):
                t = 0.5 * (b - a) * xg + 0.5 * (a + b)
                zs.append(seg.point(t))
                ws.append(seg.deriv(t) * wg * 0.5 * (b - a))
                sg.append(np.full(order, k))
                ts.append(t)
        if not zs:
            e = np.zeros(0)
            return ContourNodes(e.astype(complex), e.astype(complex), e.astype(int), e)
        return ContourNodes(np.concatenate(zs), np.concatenate(ws),
                            np.concatenate(sg), np.concatenate(ts))

    def __str__(self):
        return f"Contour({self.start:.6g} -> {self.end:.6g}, {len(self.segments)} pieces)"


def polyline(points) -> Contour:
    pts = [complex(p) for p in points]
    return Contour(tuple(Line(a, b) for a, b in zip(pts[:-1], pts[1:])))


def real_segment(a: float, b: float) -> Contour:
    return Contour((Line(complex(a), complex(b)),))


def detour_contour(x_start: float, x_end: float, x_star: float, radius: float,
                   upper: bool) -> Contour:
    """Real axis from x_start to x_end with a semicircle around x_star."""
    lo, hi = x_star - radius, x_star + radius
    forward = x_end > x_start
    if forward:
        th0, th1 = (np.pi, 0.0) if upper else (-np.pi, 0.0)
        pieces = (Line(complex(x_start), complex(lo)),
                  Arc(complex(x_star), radius, th0, th1),
                  Line(complex(hi), complex(x_end)))
    else:
        th0, th1 = (0.0, np.pi) if upper else (0.0, -np.pi)
        pieces = (Line(complex(x_start), complex(hi)),
                  Arc(complex(x_star), radius, th0, th1),
                  Line(complex(lo), complex(x_end)))
    return Contour(tuple(p for p in pieces if p.length > 0))


def rectangle_detour(x_start: float, x_end: float, x_star: float, half: float,
                     height: float, upper: bool) -> Contour:
    sgn = 1.0 if upper else -1.0
    lo, hi = x_star - half, x_star + half
    if x_end > x_start:
        pts = [x_start, lo, lo + 1j * sgn * height, hi + 1j * sgn * height, hi, x_end]
    else:
        pts = [x_start, hi, hi + 1j * sgn * height, lo + 1j * sgn * height, lo, x_end]
    c = polyline(pts)
    return Contour(tuple(s for s in c.segments if s.length > 0))


def loop_contour(x_star: float, radius: float, x_out: float = 0.0) -> Contour:
    """0 -> x*-r along the axis, clockwise circle around x*, back to 0."""
    a = complex(x_out)
    lo = complex(x_star - radius)
    return Contour((Line(a, lo), Arc(complex(x_star), radius, np.pi, np.pi - 2 * np.pi),
                    Line(lo, a)))


def continue_log_lambda(profile: Profile, contour: Contour, t_eval: dict | None = None,
                        y_start: complex | None = None):
    """Continue y = ln(lam) along the contour.

    Returns (y_end, evals) where evals[k] is y at the requested parameters of
    segment k.
    """
    y = y_start
    evals = {}
    for k, seg in enumerate(contour.segments):
        if y is None:
            zs = complex(seg.point(0.0))
            if zs.imag != 0:
                raise ValueError("contour must start on the real axis")
            y = complex(profile.log_lambda(zs.real))
        if seg.length == 0:
            if t_eval and k in t_eval:
                evals[k] = np.full(len(t_eval[k]), y, dtype=complex)
            continue
        f = continue_profile_complex(profile, seg, y0=y)
        if t_eval and k in t_eval:
            evals[k] = np.asarray(f(np.asarray(t_eval[k])), dtype=complex)
        y = complex(f(1.0))
    return y, evals


def flow_on_nodes(profile: Profile, contour: Contour, nodes: ContourNodes,
                  y_start: complex | None = None) -> tuple[FlowPoint, np.ndarray, complex]:
    """FlowPoint and y = ln(lam) at contour nodes (complex arithmetic)."""
    t_eval = {}
    for k in np.unique(nodes.seg):
        t_eval[int(k)] = nodes.t[nodes.seg == k]
    y_end, ev = continue_log_lambda(profile, contour, t_eval, y_start)
    y = np.empty(nodes.z.shape, dtype=complex)
    for k, vals in ev.items():
        y[nodes.seg == k] = vals
    return profile.flow_from_lambda(np.exp(y)), y, y_end


def flow_along(profile: Profile, points) -> FlowPoint:
    """FlowPoint at each vertex of a polyline starting on the real axis."""
    points = np.asarray(points, dtype=complex)
    y = np.empty(points.shape, dtype=complex)
    y[0] = complex(profile.log_lambda(points[0].real))
    for k in range(1, points.size):
        seg = Line(points[k - 1], points[k])
        if seg.length == 0:
            y[k] = y[k - 1]
            continue
        f = continue_profile_complex(profile, seg, y0=y[k - 1])
        y[k] = complex(f(1.0))
    return profile.flow_from_lambda(np.exp(y))
