"""Primitive lattice vectors and the bijection between multiplicity
distributions and convex polygonal lines.

A convex polygonal line here is a piecewise-linear path from (0,0) whose steps
are nonnegative lattice vectors with strictly increasing edge slopes.  Such a
line is the same thing as a finitely supported map omega from the set of
primitive vectors (coprime coordinates, first quadrant) to positive integers:
each primitive direction x used by the line appears with multiplicity
omega(x), and sorting directions by slope rebuilds the line.  The number of
vertices K is the support size, so a line with K = k has k+1 lattice points
counting both endpoints.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "is_primitive",
    "slope_sorted",
    "primitive_vectors_in_box",
    "count_primitive_in_box",
    "primitive_vectors_by_weight",
    "MultiplicityDistribution",
    "ConvexPolyline",
    "omega_to_polyline",
    "polyline_to_omega",
]

Vec = tuple[int, int]


def is_primitive(x1: int, x2: int) -> bool:
    """True iff (x1,x2) is a valid primitive direction (coprime, not origin)."""
    return x1 >= 0 and x2 >= 0 and math.gcd(x1, x2) == 1


def _cross(u: Vec, v: Vec) -> int:
    return u[0] * v[1] - u[1] * v[0]


def slope_sorted(vectors) -> list[Vec]:
    """Sort primitive vectors by slope, (1,0) first, (0,1) last.

    Comparison is the exact integer cross product u.x1*v.x2 - u.x2*v.x1 > 0,
    never floating division; distinct primitive vectors cannot tie.
    """
    import functools

    return sorted(vectors, key=functools.cmp_to_key(lambda u, v: -_cross(u, v)))


def primitive_vectors_in_box(n1: int, n2: int) -> list[Vec]:
    """All primitive vectors with x1 <= n1, x2 <= n2, in increasing slope order.

    Walks the Stern-Brocot tree of slopes strictly between 0 and infinity with
    an explicit stack (in-order traversal), pruning a subtree as soon as its
    mediant leaves the box: every deeper vector dominates the mediant
    componentwise, so nothing in the box is missed.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("box sides must be >= 1")
    out: list[Vec] = [(1, 0)]
    # frames: ("visit", lo, hi) expands the open slope interval; ("emit", v) appends
    stack: list[tuple] = [("visit", (1, 0), (0, 1))]
    while stack:
        frame = stack.pop()
        if frame[0] == "emit":
            out.append(frame[1])
            continue
        _, lo, hi = frame
        med = (lo[0] + hi[0], lo[1] + hi[1])
        if med[0] > n1 or med[1] > n2:
            continue
        stack.append(("visit", med, hi))
        stack.append(("emit", med))
        stack.append(("visit", lo, med))
    out.append((0, 1))
    return out


def count_primitive_in_box(n1: int, n2: int) -> int:
    """|{x primitive : x1 <= n1, x2 <= n2}| via a vectorized gcd grid."""
    if n1 < 1 or n2 < 1:
        raise ValueError("box sides must be >= 1")
    a = np.arange(n1 + 1, dtype=np.int64)[:, None]
    b = np.arange(n2 + 1, dtype=np.int64)[None, :]
    return int(np.count_nonzero(np.gcd(a, b) == 1))


def primitive_vectors_by_weight(energy, cutoff: float):
    """Yield every primitive x with energy(x) <= cutoff, exactly once.

    `energy` must be strictly positive and coordinatewise nondecreasing on the
    nonzero quadrant; that is what lets a column scan terminate.  Non-monotone
    weights are rejected by spot checks on a small frontier.  Within each
    column x1 = const the yield order is increasing x2, i.e. increasing slope;
    the order across columns is deterministic (x1 ascending).
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    for a, b in ((1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (3, 2)):
        if energy(a, b) <= 0:
            raise ValueError(f"energy must be strictly positive, got energy{(a, b)} <= 0")
        if energy(a + 1, b) < energy(a, b) or energy(a, b + 1) < energy(a, b):
            raise ValueError("energy must be coordinatewise nondecreasing")

    # column x1 = 0 holds the single primitive (0,1)
    if energy(0, 1) <= cutoff:
        yield (0, 1)
    x1 = 1
    while energy(x1, 0) <= cutoff:
        for x2 in range(0, _column_top(energy, x1, cutoff) + 1):
            if math.gcd(x1, x2) == 1:
                yield (x1, x2)
        x1 += 1


def _column_top(energy, x1: int, cutoff: float) -> int:
    """Largest x2 with energy(x1,x2) <= cutoff, by doubling then bisection."""
    hi = 1
    while energy(x1, hi) <= cutoff:
        hi *= 2
    lo = hi // 2 if hi > 1 else 0
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if energy(x1, mid) <= cutoff:
            lo = mid
        else:
            hi = mid
    return lo if energy(x1, lo) <= cutoff else -1


@dataclass(frozen=True)
class MultiplicityDistribution:
    """Finitely supported map from primitive vectors to positive multiplicities."""

    support: dict[Vec, int] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[Vec, int] = {}
        for x, m in self.support.items():
            x = (int(x[0]), int(x[1]))
            m = int(m)
            if m == 0:
                continue  # zero entries are normalized away
            if m < 0:
                raise ValueError(f"negative multiplicity {m} at {x}")
            if not is_primitive(*x):
                raise ValueError(f"{x} is not a primitive vector")
            clean[x] = m
        object.__setattr__(self, "support", clean)

    @property
    def vertex_count(self) -> int:
        return len(self.support)

    def endpoint(self) -> Vec:
        e1 = sum(m * x[0] for x, m in self.support.items())
        e2 = sum(m * x[1] for x, m in self.support.items())
        return (e1, e2)

    def items_slope_sorted(self) -> list[tuple[Vec, int]]:
        return [(x, self.support[x]) for x in slope_sorted(self.support)]

    def to_json(self) -> str:
        rows = [[x[0], x[1], m] for x, m in self.items_slope_sorted()]
        return json.dumps({"support": rows})

    @classmethod
    def from_json(cls, text: str) -> "MultiplicityDistribution":
        data = json.loads(text)
        return cls({(int(r[0]), int(r[1])): int(r[2]) for r in data["support"]})

    def __eq__(self, other):
        if not isinstance(other, MultiplicityDistribution):
            return NotImplemented
        return self.support == other.support

    def __hash__(self):
        return hash(tuple(sorted(self.support.items())))


@dataclass(frozen=True)
class ConvexPolyline:
    """Lattice path from (0,0): steps in the closed first quadrant, slopes
    strictly increasing edge to edge."""

    vertices: tuple[Vec, ...]

    def __post_init__(self):
        verts = tuple((int(p[0]), int(p[1])) for p in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if not verts:
            raise ValueError("polyline needs at least the origin vertex")
        if verts[0] != (0, 0):
            raise ValueError("polyline must start at (0,0)")
        prev_edge = None
        for i in range(1, len(verts)):
            d = (verts[i][0] - verts[i - 1][0], verts[i][1] - verts[i - 1][1])
            if d == (0, 0) or d[0] < 0 or d[1] < 0:
                raise ValueError(f"edge {i - 1} is not a nonzero quadrant step: {d}")
            if prev_edge is not None and _cross(prev_edge, d) <= 0:
                raise ValueError(f"edge {i - 1} does not increase the slope")
            prev_edge = d

    def endpoint(self) -> Vec:
        return self.vertices[-1]

    def edges(self) -> list[Vec]:
        v = self.vertices
        return [(v[i][0] - v[i - 1][0], v[i][1] - v[i - 1][1]) for i in range(1, len(v))]

    def to_json(self) -> str:
        return json.dumps({"vertices": [[p[0], p[1]] for p in self.vertices]})

    @classmethod
    def from_json(cls, text: str) -> "ConvexPolyline":
        data = json.loads(text)
        return cls(tuple((int(p[0]), int(p[1])) for p in data["vertices"]))


def omega_to_polyline(omega: MultiplicityDistribution) -> ConvexPolyline:
    """Partial sums of m*x in slope order; K+1 vertices, endpoint preserved."""
    pts = [(0, 0)]
    a = b = 0
    for x, m in omega.items_slope_sorted():
        a += m * x[0]
        b += m * x[1]
        pts.append((a, b))
    return ConvexPolyline(tuple(pts))


def polyline_to_omega(line: ConvexPolyline) -> MultiplicityDistribution:
    """Inverse of omega_to_polyline: each edge (d1,d2) contributes the primitive
    direction (d1/g, d2/g) with multiplicity g = gcd(d1,d2)."""
    support: dict[Vec, int] = {}
    for d in line.edges():
        g = math.gcd(d[0], d[1])
        support[(d[0] // g, d[1] // g)] = g
    return MultiplicityDistribution(support)
