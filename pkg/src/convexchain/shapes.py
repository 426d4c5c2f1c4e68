"""Limit curves for normalized convex lattice lines, and the distance to them.

Three curve families live here: the parabola family with an aspect ratio
(the endpoint-constrained limit), the quarter circle traversed from (0,0)
to (1,1) (the length-constrained limit), and the one-parameter mixed family
that interpolates between them when both constraints are active.  On top of
those: the curve length L of the mixed family, normalization of lattice
lines into the unit square, a symmetric Hausdorff distance between a
polyline and a curve, and small CSV/SVG emitters for inspection.

The mixed-family coordinates are quotients of trigonometric integrals; they
are evaluated with adaptive Simpson bisection to absolute tolerance
CURVE_QUAD_TOL.  The parametrization is transcribed literally, and each
constructed mixed curve verifies eval(1) = (1,1) numerically — if that check
ever fires, the formulas were transcribed inconsistently and the error is
raised rather than patched.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .lattice import ConvexPolyline

__all__ = [
    "CURVE_QUAD_TOL",
    "ShapeCurve",
    "NormalizedPolyline",
    "parabola_point",
    "mixed_curve",
    "mixed_length",
    "normalize",
    "hausdorff_distance",
    "curve_csv",
    "overlay_svg",
]

CURVE_QUAD_TOL = 1e-10
_QUARTER_PI = math.pi / 4.0
_MIXED_DOMAIN_EDGE = -1.0 / math.sqrt(2.0)


def _adaptive_simpson(f, a, b, tol=CURVE_QUAD_TOL):
    """Classic adaptive Simpson with interval bisection and Richardson tail."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_split(f, a, b, fa, fm, fb, whole, tol, 48)


def _simpson_split(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    if depth <= 0:
        raise RuntimeError(
            f"adaptive quadrature stalled on [{a!r}, {b!r}]; integrand too "
            "sharply peaked for the requested tolerance"
        )
    return _simpson_split(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + \
        _simpson_split(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)


def parabola_point(theta, ratio=1.0):
    """Point of the limit parabola at slope parameter theta in [0, inf].

    With r = ratio the point is (th(th+2r)/(th+r)^2, th^2/(th+r)^2); at r=1
    the traced curve is sqrt(y) + sqrt(1-x) = 1.
    """
    if ratio <= 0.0:
        raise ValueError(f"aspect ratio must be positive, got {ratio!r}")
    if theta == math.inf:
        return (1.0, 1.0)
    if theta < 0.0:
        raise ValueError(f"slope parameter must be nonnegative, got {theta!r}")
    d = (theta + ratio) ** 2
    return (theta * (theta + 2.0 * ratio) / d, theta * theta / d)


def _check_mixed_domain(lambda_ell):
    if not lambda_ell > _MIXED_DOMAIN_EDGE:
        raise ValueError(
            f"mixed-curve denominator is singular at lambda_ell={lambda_ell!r}; "
            "the evaluable branch needs lambda_ell > -1/sqrt(2)"
        )


@lru_cache(maxsize=64)
def _mixed_denominator(lambda_ell):
    # integral of cos(u)/(lambda+cos(u))^3 over [-pi/4, pi/4]; even integrand.
    # The whole family scales like (lambda+1)^-3, so that factor is pulled
    # out before quadrature to keep the tolerance meaningful at large lambda.
    s = (lambda_ell + 1.0) ** 3
    return 2.0 / s * _adaptive_simpson(
        lambda u: s * math.cos(u) / (lambda_ell + math.cos(u)) ** 3,
        0.0, _QUARTER_PI, 0.5 * CURVE_QUAD_TOL)


def _mixed_increment(lambda_ell, lo, hi, tol=CURVE_QUAD_TOL):
    """Unnormalized (dx, dy) of the mixed curve over angles [lo, hi]."""
    s = (lambda_ell + 1.0) ** 3

    def fx(u):
        return s * math.cos(u) / (lambda_ell + math.cos(u - _QUARTER_PI)) ** 3

    def fy(u):
        return s * math.sin(u) / (lambda_ell + math.cos(u - _QUARTER_PI)) ** 3

    return (_adaptive_simpson(fx, lo, hi, tol) / s,
            _adaptive_simpson(fy, lo, hi, tol) / s)


def mixed_curve(lambda_ell, phi):
    """Point of the mixed limit curve at angle phi in [0, pi/2]."""
    _check_mixed_domain(lambda_ell)
    if not 0.0 <= phi <= math.pi / 2.0 + 1e-12:
        raise ValueError(f"angle must lie in [0, pi/2], got {phi!r}")
    scale = math.sqrt(2.0) / _mixed_denominator(lambda_ell)
    dx, dy = _mixed_increment(lambda_ell, 0.0, min(phi, math.pi / 2.0))
    return (scale * dx, scale * dy)


def mixed_length(lambda_ell):
    """Arc length L of the mixed limit curve, a quotient of two integrals.

    L(0) = 1 + ln(1+sqrt(2))/sqrt(2) and L tends to pi/2 as lambda_ell
    grows (the circle); always strictly between sqrt(2) and 2.
    """
    _check_mixed_domain(lambda_ell)
    s = (lambda_ell + 1.0) ** 3
    num = _adaptive_simpson(
        lambda u: s / (lambda_ell + math.cos(u)) ** 3, 0.0, _QUARTER_PI)
    den = _adaptive_simpson(
        lambda u: s * math.cos(u) / (lambda_ell + math.cos(u)) ** 3,
        0.0, _QUARTER_PI)
    return math.sqrt(2.0) * num / den


@dataclass(frozen=True)
class ShapeCurve:
    """One member of the limit-curve catalogue, parametrized over t in [0,1].

    point(0) = (0,0), point(1) = (1,1), and both coordinates are
    nondecreasing in t.  Build instances through the factory classmethods.
    """

    kind: str
    ratio: float = 1.0
    lambda_ell: float = 0.0

    @classmethod
    def parabola(cls, ratio=1.0):
        if ratio <= 0.0:
            raise ValueError(f"aspect ratio must be positive, got {ratio!r}")
        return cls(kind="parabola", ratio=float(ratio))

    @classmethod
    def circle(cls):
        return cls(kind="circle")

    @classmethod
    def mixed(cls, lambda_ell):
        _check_mixed_domain(lambda_ell)
        curve = cls(kind="mixed", lambda_ell=float(lambda_ell))
        end = curve.point(1.0)
        if max(abs(end[0] - 1.0), abs(end[1] - 1.0)) > 1e-8:
            raise RuntimeError(
                f"mixed-curve endpoint check failed at lambda_ell="
                f"{lambda_ell!r}: eval(1) = {end!r}, expected (1,1); the "
                "transcribed parametrization is inconsistent"
            )
        return curve

    def point(self, t):
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"curve parameter must lie in [0,1], got {t!r}")
        if self.kind == "parabola":
            if t == 1.0:
                return (1.0, 1.0)
            return parabola_point(t / (1.0 - t), self.ratio)
        if self.kind == "circle":
            a = 0.5 * math.pi * t
            return (math.sin(a), 1.0 - math.cos(a))
        return mixed_curve(self.lambda_ell, 0.5 * math.pi * t)

    def sample(self, mesh):
        """Points at t = i/mesh, i = 0..mesh, as a (mesh+1, 2) float array."""
        if mesh < 1:
            raise ValueError(f"mesh must be a positive integer, got {mesh!r}")
        t = np.linspace(0.0, 1.0, mesh + 1)
        if self.kind == "parabola":
            th = np.empty_like(t)
            th[:-1] = t[:-1] / (1.0 - t[:-1])
            out = np.empty((mesh + 1, 2))
            d = (th[:-1] + self.ratio) ** 2
            out[:-1, 0] = th[:-1] * (th[:-1] + 2.0 * self.ratio) / d
            out[:-1, 1] = th[:-1] ** 2 / d
            out[-1] = (1.0, 1.0)
            return out
        if self.kind == "circle":
            a = 0.5 * math.pi * t
            return np.column_stack([np.sin(a), 1.0 - np.cos(a)])
        # mixed: one cumulative pass, one short quadrature per mesh cell
        angles = 0.5 * math.pi * t
        tol = max(1e-14, CURVE_QUAD_TOL / mesh)
        out = np.zeros((mesh + 1, 2))
        x = y = 0.0
        for i in range(mesh):
            dx, dy = _mixed_increment(
                self.lambda_ell, angles[i], angles[i + 1], tol)
            x += dx
            y += dy
            out[i + 1] = (x, y)
        out *= math.sqrt(2.0) / _mixed_denominator(self.lambda_ell)
        return out


@dataclass(frozen=True)
class NormalizedPolyline:
    """A lattice line mapped into the unit square by its source scale."""

    vertices: np.ndarray
    scale: tuple = field(default=(1.0, 1.0))

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError("normalized polyline needs an (m, 2) point array")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "vertices", pts)
        object.__setattr__(
            self, "scale", (float(self.scale[0]), float(self.scale[1])))


def normalize(line, scale):
    """Divide a lattice line's vertices componentwise by scale = (n1, n2).

    Accepts a ConvexPolyline or any (m, 2) array of points.  A line with the
    exact endpoint (n1, n2) lands on (1,1); an empty-support line collapses
    to the single point (0,0).
    """
    n1, n2 = float(scale[0]), float(scale[1])
    if n1 <= 0.0 or n2 <= 0.0:
        raise ValueError(f"scale must be positive, got {scale!r}")
    if isinstance(line, ConvexPolyline):
        pts = np.asarray(line.vertices, dtype=float)
    else:
        pts = np.atleast_2d(np.asarray(line, dtype=float))
    return NormalizedPolyline(pts / np.array([n1, n2]), (n1, n2))


def _densify(pts, mesh):
    """Polyline vertices plus mesh points spread evenly in arc length."""
    if pts.shape[0] == 1:
        return pts
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0.0:
        return pts[:1]
    grid = np.linspace(0.0, s[-1], mesh + 1)
    dense = np.column_stack([
        np.interp(grid, s, pts[:, 0]),
        np.interp(grid, s, pts[:, 1]),
    ])
    return np.vstack([pts, dense])


def hausdorff_distance(line, curve, mesh=1000):
    """Symmetric Hausdorff distance between a polyline and a curve.

    Both objects are discretized with ~mesh points (the polyline evenly in
    arc length plus its own vertices, the curve at mesh+1 parameter values),
    so the result converges from below with discretization error on the
    order of arc-length/mesh.
    """
    if mesh < 100:
        raise ValueError(f"mesh must be at least 100, got {mesh!r}")
    if isinstance(line, NormalizedPolyline):
        pts = line.vertices
    else:
        pts = np.atleast_2d(np.asarray(line, dtype=float))
    if pts.shape[0] < 1:
        raise ValueError("degenerate polyline: need at least one point")
    if isinstance(curve, ShapeCurve):
        curve_pts = curve.sample(mesh)
    else:
        curve_pts = np.atleast_2d(np.asarray(curve, dtype=float))
        if curve_pts.shape[0] < 1:
            raise ValueError("degenerate curve: need at least one point")
    dense = _densify(pts, mesh)
    d_line = cKDTree(curve_pts).query(dense)[0].max()
    d_curve = cKDTree(dense).query(curve_pts)[0].max()
    return float(max(d_line, d_curve))


def curve_csv(curve, mesh=200):
    """CSV text of (t, x, y) samples of a curve."""
    pts = curve.sample(mesh)
    t = np.linspace(0.0, 1.0, mesh + 1)
    lines = ["t,x,y"]
    lines.extend(
        f"{ti:.10g},{x:.10g},{y:.10g}" for ti, (x, y) in zip(t, pts))
    return "\n".join(lines) + "\n"


def overlay_svg(line, curve, mesh=400):
    """SVG of a normalized polyline overlaid on a limit curve.

    Unit-square viewBox with the y axis flipped to the usual mathematical
    orientation; output is deterministic for fixed inputs.
    """
    if isinstance(line, NormalizedPolyline):
        pts = line.vertices
    else:
        pts = np.atleast_2d(np.asarray(line, dtype=float))
    curve_pts = curve.sample(mesh) if isinstance(curve, ShapeCurve) else \
        np.atleast_2d(np.asarray(curve, dtype=float))

    def path(points):
        return " ".join(f"{x:.6f},{1.0 - y:.6f}" for x, y in points)

    return (
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-0.05 -0.05 1.1 1.1" '
        'width="440" height="440">\n'
        '<rect x="0" y="0" width="1" height="1" fill="none" '
        'stroke="#cccccc" stroke-width="0.002"/>\n'
        f'<polyline points="{path(curve_pts)}" fill="none" '
        'stroke="#d62728" stroke-width="0.004"/>\n'
        f'<polyline points="{path(pts)}" fill="none" '
        'stroke="#1f77b4" stroke-width="0.004"/>\n'
        "</svg>\n"
    )
