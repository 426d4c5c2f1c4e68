"""Exact enumeration of convex lattice lines.

Everything here is integer-exact: the number p(n1,n2;k) of lines with endpoint
(n1,n2) and k vertices grows like exp(c * n^(2/3)), so counts are kept as
Python big ints end to end, and the DP refuses up front (never mid-run) when
its estimated work exceeds a configured budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lattice import (
    ConvexPolyline,
    MultiplicityDistribution,
    omega_to_polyline,
    primitive_vectors_in_box,
    slope_sorted,
)
from .tolerances import COUNT_OP_BUDGET

__all__ = [
    "CountTable",
    "count_lines_k",
    "brute_force_enum",
    "max_vertices",
    "erdos_lehner_ratio",
    "count_by_length",
]

BRUTE_FORCE_CAP = 12
LENGTH_CAP = 15.0


@dataclass(frozen=True)
class CountTable:
    """p(a,b;j) for every endpoint (a,b) inside the computed box and j <= kmax.

    entries maps (a, b, j) -> exact count; zero counts are stored implicitly
    (lookups return 0).
    """

    n1: int
    n2: int
    kmax: int
    entries: dict[tuple[int, int, int], int]

    def p(self, a: int, b: int, k: int) -> int:
        return self.entries.get((a, b, k), 0)

    def total(self, a: int, b: int) -> int:
        return sum(self.p(a, b, k) for k in range(1, self.kmax + 1))

    def csv_rows(self):
        for (a, b, k), c in sorted(self.entries.items()):
            yield a, b, k, str(c)


def _dp_cost_estimate(n1: int, n2: int, kmax: int) -> int:
    """Exact number of big-int additions the layered DP will perform."""
    ops = 0
    for p, q in primitive_vectors_in_box(n1, n2):
        m = 1
        while m * p <= n1 and m * q <= n2:
            ops += (n1 - m * p + 1) * (n2 - m * q + 1)
            m += 1
    return ops * kmax


def count_lines_k(n1: int, n2: int, kmax: int, op_budget: int = COUNT_OP_BUDGET) -> CountTable:
    """Exact p(a,b;j) for all a <= n1, b <= n2, j <= kmax.

    Layered DP over primitive vectors in slope order: layer[j][a][b] counts the
    multiplicity distributions using j of the vectors processed so far with
    partial sum (a,b).  Each vector v is folded in by adding, for every
    multiplicity m >= 1, the shift of layer[j-1] by m*v — reading layer[j-1]
    before it is touched (j runs downward), so v contributes to exactly one
    support slot.
    """
    if n1 < 1 or n2 < 1 or kmax < 1:
        raise ValueError("n1, n2, kmax must be >= 1")
    est = _dp_cost_estimate(n1, n2, kmax)
    if est > op_budget:
        raise ResourceWarning(
            f"count_lines_k({n1},{n2},{kmax}) needs ~{est:.2e} big-int adds, "
            f"over the budget {op_budget:.2e}"
        )

    width = n2 + 1
    layers = [[[0] * width for _ in range(n1 + 1)] for _ in range(kmax + 1)]
    layers[0][0][0] = 1

    for p, q in primitive_vectors_in_box(n1, n2):
        for j in range(kmax, 0, -1):
            src = layers[j - 1]
            dst = layers[j]
            m = 1
            while m * p <= n1 and m * q <= n2:
                dp, dq = m * p, m * q
                w = width - dq
                for a in range(dp, n1 + 1):
                    row_d = dst[a]
                    row_s = src[a - dp]
                    row_d[dq:] = [x + y for x, y in zip(row_d[dq:], row_s[:w])]
                m += 1

    entries: dict[tuple[int, int, int], int] = {}
    for j in range(1, kmax + 1):
        lay = layers[j]
        for a in range(n1 + 1):
            row = lay[a]
            for b in range(n2 + 1):
                if row[b]:
                    entries[(a, b, j)] = row[b]
    return CountTable(n1, n2, kmax, entries)


def brute_force_enum(n1: int, n2: int) -> list[MultiplicityDistribution]:
    """Every omega with endpoint exactly (n1,n2), by DFS in slope order.

    Independent of the DP on purpose — this is the oracle the DP is checked
    against.  Hard-capped at 12 per side.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("endpoint coordinates must be >= 1")
    if n1 > BRUTE_FORCE_CAP or n2 > BRUTE_FORCE_CAP:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_CAP} per side")
    vecs = primitive_vectors_in_box(n1, n2)
    out: list[MultiplicityDistribution] = []
    chosen: list[tuple[tuple[int, int], int]] = []

    def rec(i: int, r1: int, r2: int):
        if r1 == 0 and r2 == 0:
            out.append(MultiplicityDistribution(dict(chosen)))
            return
        if i == len(vecs):
            return
        rec(i + 1, r1, r2)
        p, q = vecs[i]
        m = 1
        while m * p <= r1 and m * q <= r2:
            chosen.append(((p, q), m))
            rec(i + 1, r1 - m * p, r2 - m * q)
            chosen.pop()
            m += 1

    rec(0, n1, n2)
    return out


def max_vertices(n1: int, n2: int, op_budget: int = COUNT_OP_BUDGET) -> int:
    """Exact max of K(omega) over lines with endpoint (n1,n2).

    Same vector sweep as count_lines_k but the state is the best support size
    reachable at each partial sum (-1 = unreachable), vectorized with numpy.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("n1, n2 must be >= 1")
    est = _dp_cost_estimate(n1, n2, 1)
    if est > op_budget:
        raise ResourceWarning(
            f"max_vertices({n1},{n2}) needs ~{est:.2e} cell updates, "
            f"over the budget {op_budget:.2e}"
        )
    best = np.full((n1 + 1, n2 + 1), -1, dtype=np.int64)
    best[0, 0] = 0
    for p, q in primitive_vectors_in_box(n1, n2):
        prev = best.copy()  # additions of this vector must read the pre-sweep state
        m = 1
        while m * p <= n1 and m * q <= n2:
            dp, dq = m * p, m * q
            src = prev[: n1 + 1 - dp, : n2 + 1 - dq]
            dst = best[dp:, dq:]
            np.maximum(dst, np.where(src >= 0, src + 1, -1), out=dst)
            m += 1
    return int(best[n1, n2])


def erdos_lehner_ratio(n: int, k: int, table: CountTable | None = None) -> float:
    """p(n,n;k) * k! / C(n-1,k-1)^2 as an exact rational, returned as float."""
    if table is None or table.n1 < n or table.n2 < n or table.kmax < k:
        table = count_lines_k(n, n, k)
    denom = math.comb(n - 1, k - 1) ** 2
    if denom == 0:
        raise ValueError(f"C({n - 1},{k - 1}) vanishes")
    return float(Fraction(table.p(n, n, k) * math.factorial(k), denom))


def count_by_length(Lmax: float, order: str = "slope") -> dict[tuple[int, int], int]:
    """Counts of lines from the origin (any endpoint) with Euclidean length
    < Lmax, bucketed by (floor(length), K).  Empty line excluded.

    `order` picks the DFS vector ordering ("slope" or "length"); the buckets
    must not depend on it, which the tests exercise as a cross-check.
    """
    if Lmax <= 0:
        raise ValueError("Lmax must be positive")
    if Lmax > LENGTH_CAP:
        raise ValueError(f"enumeration capped at Lmax = {LENGTH_CAP}")
    box = int(math.floor(Lmax))
    vecs = [
        (p, q)
        for p, q in primitive_vectors_in_box(max(box, 1), max(box, 1))
        if math.hypot(p, q) <= Lmax
    ]
    if order == "slope":
        pass  # already slope-sorted
    elif order == "length":
        vecs = sorted(vecs, key=lambda v: (math.hypot(v[0], v[1]), v))
    else:
        raise ValueError(f"unknown order {order!r}")
    norms = [math.hypot(p, q) for p, q in vecs]

    buckets: dict[tuple[int, int], int] = {}

    def rec(i: int, length: float, k: int):
        if k > 0:
            key = (int(math.floor(length)), k)
            buckets[key] = buckets.get(key, 0) + 1
        for j in range(i, len(vecs)):
            step = norms[j]
            if length + step > Lmax:
                continue
            m = 1
            while length + m * step <= Lmax:
                rec(j + 1, length + m * step, k + 1)
                m += 1

    rec(0, 0.0, 0)
    return buckets


def line_length(line: ConvexPolyline) -> float:
    return sum(math.hypot(d[0], d[1]) for d in line.edges())
