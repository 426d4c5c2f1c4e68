"""Reproducible experiment drivers.

Everything here orchestrates the library modules into named, seeded,
deterministic checks: the few-vertex sampler built on sorted uniform
increments, the Euclidean-length model runs, shape-convergence sweeps, and
the suite runner that emits machine-readable {check, target, observed,
tolerance, pass} rows.  Every stochastic routine takes an explicit integer
seed (default 0, never wall clock), and reports are sorted by check name so
byte-identical output only depends on the config.
"""

import hashlib
import json
import math
import warnings
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq
from scipy.stats import chi2

from .calibrate import CalibrationTarget, exact_calibrate, predicted_log_pnk
from .counting import brute_force_enum, count_lines_k, line_length
from .gibbs import (
    DEFAULT_TRUNCATION,
    EnergyModel,
    GibbsParams,
    log_partition,
    moments,
    sample_omega,
)
from .lattice import ConvexPolyline, omega_to_polyline, primitive_vectors_in_box
from .shapes import ShapeCurve, hausdorff_distance, normalize
from .specialfn import ZETA3, c_of_ell, e_of_ell

__all__ = [
    "sample_valtr",
    "enumerate_ne_lines",
    "valtr_uniformity_chisquare",
    "typical_vertex_count",
    "gibbs_parabola_distances",
    "valtr_parabola_distances",
    "jarnik_greedy_vertex_count",
    "run_jarnik",
    "run_suite",
    "SUITE_NAMES",
]

VALTR_REJECTION_BUDGET = 10**4


def _child_seed(seed, index):
    """Stable per-sample substream seed; independent draws, replayable rows."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def sample_valtr(n, k, seed=0, rng=None, budget=VALTR_REJECTION_BUDGET):
    """One uniform strictly North-East convex line to (n, n) with k edges.

    Construction: k-1 sorted uniforms on each axis give an increasing
    North-East path through (U_i, V_i); abscissas are rounded up to the
    lattice (U_i <= u_i/n < U_i + 1/n) and ordinates down, endpoints stay
    pinned at (0,0) and (n,n); the increments are reordered by increasing
    slope.  Draws whose discretized increments are not all strictly positive
    in both coordinates, or contain two parallel vectors, are rejected and
    redrawn — conditioning on that event makes the reordered line exactly
    uniform on the strictly North-East k-edge lines.
    """
    if k < 2:
        raise ValueError(f"need at least two edges, got k={k}")
    if n < k:
        raise ValueError(f"no strictly North-East line with {k} edges fits in n={n}")
    if k**3 >= n:
        warnings.warn(
            f"k^3 = {k**3} >= n = {n}: outside the few-vertex regime; "
            "sampling stays exact but shape convergence degrades",
            stacklevel=2,
        )
    if rng is None:
        rng = np.random.default_rng(seed)
    for _ in range(budget):
        u = np.ceil(n * np.sort(rng.uniform(size=k - 1))).astype(np.int64)
        v = np.floor(n * np.sort(rng.uniform(size=k - 1))).astype(np.int64)
        a = np.diff(np.concatenate([[0], u, [n]]))
        b = np.diff(np.concatenate([[0], v, [n]]))
        if (a < 1).any() or (b < 1).any():
            continue
        pairs = list(zip(a.tolist(), b.tolist()))
        if _has_parallel_pair(pairs):
            continue
        pairs.sort(key=lambda d: Fraction(d[1], d[0]))
        verts = [(0, 0)]
        for da, db in pairs:
            verts.append((verts[-1][0] + da, verts[-1][1] + db))
        return ConvexPolyline(tuple(verts))
    raise RuntimeError(
        f"rejection budget ({budget}) exhausted at n={n}, k={k}: the "
        "few-vertex regime k^3 << n is strongly violated"
    )


def _has_parallel_pair(pairs):
    seen = set()
    for a, b in pairs:
        g = math.gcd(a, b)
        d = (a // g, b // g)
        if d in seen:
            return True
        seen.add(d)
    return False


def enumerate_ne_lines(n, k):
    """All strictly North-East convex lines (0,0) -> (n,n) with k edges.

    Every edge has both coordinates >= 1 and slopes strictly increase.
    Returns the lines as tuples of edge vectors in slope order.  Intended
    for small k (the recursion visits ~n^(2(k-1)) candidates).
    """
    if k < 1 or n < k:
        return []
    out = []
    edges = []

    def rec(r1, r2, left, prev):
        if left == 1:
            if r1 >= 1 and r2 >= 1 and (
                    prev is None or prev[0] * r2 - prev[1] * r1 > 0):
                out.append((*edges, (r1, r2)))
            return
        for a in range(1, r1 - (left - 1) + 1):
            for b in range(1, r2 - (left - 1) + 1):
                if prev is not None and prev[0] * b - prev[1] * a <= 0:
                    continue
                edges.append((a, b))
                rec(r1 - a, r2 - b, left - 1, (a, b))
                edges.pop()

    rec(n, n, k, None)
    return out


def valtr_uniformity_chisquare(n, k, samples, seed=0, bins=200):
    """Chi-square statistic of the sampler against the exact uniform law.

    The reference set is enumerated exactly, hashed into `bins` cells (md5
    of the edge tuples, so the binning is stable across runs and platforms),
    and compared with the empirical cell counts of `samples` accepted draws.
    Returns a dict with the statistic, degrees of freedom and the 1-alpha
    quantiles for alpha in {0.05, 0.001}.
    """
    support = enumerate_ne_lines(n, k)
    if not support:
        raise ValueError(f"no strictly North-East lines for n={n}, k={k}")

    def cell(edge_tuple):
        digest = hashlib.md5(repr(edge_tuple).encode()).digest()
        return int.from_bytes(digest[:8], "big") % bins

    expected = np.zeros(bins)
    index = {}
    for line in support:
        index[line] = cell(line)
        expected[index[line]] += 1.0
    expected *= samples / len(support)

    observed = np.zeros(bins)
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        poly = sample_valtr(n, k, rng=rng)
        line = tuple(poly.edges())
        try:
            observed[index[line]] += 1.0
        except KeyError:
            raise AssertionError(
                f"sampler produced a line outside the enumerated support: {line}"
            ) from None

    live = expected > 0
    stat = float(np.sum((observed[live] - expected[live]) ** 2 / expected[live]))
    dof = int(live.sum()) - 1
    return {
        "statistic": stat,
        "dof": dof,
        "support_size": len(support),
        "samples": samples,
        "quantile_05": float(chi2.ppf(0.95, dof)),
        "quantile_001": float(chi2.ppf(0.999, dof)),
    }


def typical_vertex_count(n1, n2=None):
    """Most likely vertex count of a uniform line to (n1, n2): c(1)(n1 n2)^(1/3)."""
    if n2 is None:
        n2 = n1
    return max(2, round(c_of_ell(1.0) * (n1 * n2) ** (1.0 / 3.0)))


def gibbs_parabola_distances(n, count=200, seed=0, mesh=1000,
                             truncation=DEFAULT_TRUNCATION):
    """Hausdorff distances to the parabola for calibrated typical-k samples.

    Each sampled line is normalized by its own endpoint (the free-endpoint
    measure fluctuates around (n, n)), then compared with the unit-ratio
    parabola.  Returns summary statistics including the median.
    """
    k = typical_vertex_count(n)
    res = exact_calibrate(CalibrationTarget(n, n, k), trunc=truncation)
    params = res.params(truncation)
    dists = []
    for i in range(count):
        poly = omega_to_polyline(sample_omega(params, _child_seed(seed, i)))
        e1, e2 = poly.endpoint()
        if e1 == 0 or e2 == 0:
            continue
        norm = normalize(poly, (e1, e2))
        dists.append(hausdorff_distance(norm, ShapeCurve.parabola(), mesh))
    arr = np.asarray(dists)
    return {
        "n": n,
        "k": k,
        "count": int(arr.size),
        "median": float(np.median(arr)),
        "mean": float(arr.mean()),
        "q90": float(np.quantile(arr, 0.9)),
    }


def valtr_parabola_distances(n, k, count=200, seed=0, mesh=1000):
    """Median parabola distance of uniform strictly North-East k-edge lines."""
    rng = np.random.default_rng(seed)
    dists = []
    for _ in range(count):
        poly = sample_valtr(n, k, rng=rng)
        dists.append(
            hausdorff_distance(normalize(poly, (n, n)), ShapeCurve.parabola(),
                               mesh))
    arr = np.asarray(dists)
    return {
        "n": n,
        "k": k,
        "count": int(arr.size),
        "median": float(np.median(arr)),
        "mean": float(arr.mean()),
    }


def jarnik_greedy_vertex_count(length_budget):
    """Maximal vertex count of a line of total length <= budget, greedily.

    Uses each primitive direction at most once, closest first; ties broken
    lexicographically so the count is deterministic.
    """
    if length_budget <= 0:
        raise ValueError("length budget must be positive")
    box = 32
    while True:
        prims = primitive_vectors_in_box(box, box)
        prims.sort(key=lambda p: (p[0] * p[0] + p[1] * p[1], p))
        total = 0.0
        count = 0
        for p, q in prims:
            step = math.hypot(p, q)
            if total + step > length_budget:
                return count
            total += step
            count += 1
        # ran out of directions before the budget: enlarge the catalogue
        box *= 2
        if box > 1 << 14:
            raise RuntimeError("length budget too large for the greedy sweep")


def _expected_euclidean_length(beta, fugacity, truncation):
    # -d/dbeta of the log partition function, by central difference
    h = 1e-6 * beta
    lo = GibbsParams(EnergyModel.euclidean(beta - h), fugacity, truncation)
    hi = GibbsParams(EnergyModel.euclidean(beta + h), fugacity, truncation)
    return (log_partition(lo) - log_partition(hi)) / (2.0 * h)


def run_jarnik(beta, fugacity=1.0, samples=100, seed=0,
               truncation=DEFAULT_TRUNCATION, mesh=1000):
    """Sample the Euclidean-length Gibbs model and check its asymptotics.

    Reports (at fugacity 1) the vertex-per-length ratio against
    (3/(4 pi zeta(3)^2))^(1/3), the Legendre count-growth slope against
    3^(4/3) zeta(3)^(1/3)/(4 pi)^(1/3), the sampled vertex mean against the
    exact truncated moments, the median distance to the circle, and the
    greedy maximal-vertex count against (3/2) L^(2/3)/pi^(1/3).
    """
    params = GibbsParams(EnergyModel.euclidean(beta), fugacity, truncation)
    rep = moments(params)
    lengths = np.empty(samples)
    ks = np.empty(samples)
    circle = ShapeCurve.circle()
    dists = []
    for i in range(samples):
        poly = omega_to_polyline(sample_omega(params, _child_seed(seed, i)))
        lengths[i] = line_length(poly)
        ks[i] = len(poly.vertices) - 1
        e1, e2 = poly.endpoint()
        if e1 > 0 and e2 > 0:
            dists.append(
                hausdorff_distance(normalize(poly, (e1, e2)), circle, mesh))

    rows = []
    mean_len = float(lengths.mean())
    mean_k = float(ks.mean())

    ratio_target = (3.0 / (4.0 * math.pi * ZETA3**2)) ** (1.0 / 3.0)
    ratio = mean_k / mean_len ** (2.0 / 3.0)
    rows.append(_row("vertex-length ratio", ratio_target, ratio, 0.05,
                     abs(ratio / ratio_target - 1.0) <= 0.05))

    slope_target = 3.0 ** (4.0 / 3.0) * ZETA3 ** (1.0 / 3.0) / (
        4.0 * math.pi) ** (1.0 / 3.0)
    bstar = brentq(
        lambda b: _expected_euclidean_length(b, fugacity, truncation) - mean_len,
        beta / 3.0, 3.0 * beta, xtol=1e-12)
    legendre = log_partition(
        GibbsParams(EnergyModel.euclidean(bstar), fugacity, truncation)
    ) + bstar * mean_len
    slope = legendre / mean_len ** (2.0 / 3.0)
    rows.append(_row("count-growth slope", slope_target, slope, 0.05,
                     abs(slope / slope_target - 1.0) <= 0.05))

    se = float(ks.std(ddof=1) / math.sqrt(samples))
    rows.append(_row("sampled vertex mean", rep.EK, mean_k, 3.0 * se,
                     abs(mean_k - rep.EK) <= 3.0 * se))

    med = float(np.median(dists))
    rows.append(_row("median circle distance", 0.0, med, 0.12, med <= 0.12))

    greedy = jarnik_greedy_vertex_count(10**4)
    greedy_target = 1.5 * (10**4) ** (2.0 / 3.0) / math.pi ** (1.0 / 3.0)
    rows.append(_row("greedy maximal vertices", greedy_target, float(greedy),
                     0.05, abs(greedy / greedy_target - 1.0) <= 0.05))

    return {
        "beta": beta,
        "fugacity": fugacity,
        "samples": samples,
        "seed": seed,
        "mean_length": mean_len,
        "rows": _sorted_rows(rows),
        "passed": all(r["pass"] for r in rows),
    }


def _row(check, target, observed, tolerance, ok):
    return {
        "check": check,
        "target": float(target),
        "observed": float(observed),
        "tolerance": float(tolerance),
        "pass": bool(ok),
    }


def _sorted_rows(rows):
    return sorted(rows, key=lambda r: r["check"])


# ---------------------------------------------------------------------------
# named suites


def _suite_counting(config):
    rows = []
    cap = int(config.get("cap", 8))
    mismatches = 0
    for n1 in range(1, cap + 1):
        for n2 in range(1, cap + 1):
            counts = {}
            for omega in brute_force_enum(n1, n2):
                counts[omega.vertex_count] = counts.get(
                    omega.vertex_count, 0) + 1
            kmax = max(counts) if counts else 1
            table = count_lines_k(n1, n2, kmax=kmax)
            for k in range(1, kmax + 1):
                if table.p(n1, n2, k) != counts.get(k, 0):
                    mismatches += 1
    rows.append(_row("dp equals brute force below cap", 0.0, float(mismatches),
                     0.0, mismatches == 0))

    table60 = count_lines_k(60, 60, kmax=3)
    rows.append(_row("p(60,60;2) frozen", 1830.0, float(table60.p(60, 60, 2)),
                     0.0, table60.p(60, 60, 2) == 1830))
    rows.append(_row("p(60,60;3) frozen", 589670.0,
                     float(table60.p(60, 60, 3)),
                     0.0, table60.p(60, 60, 3) == 589670))
    return rows


def _suite_calibration(config):
    rows = []
    for k in (5, 34):
        res = exact_calibrate(CalibrationTarget(300, 300, k))
        worst = max(abs(r) for r in res.residuals)
        rows.append(_row(f"moment residuals at k={k}", 0.0, worst, 1e-6,
                         res.converged and worst <= 1e-6))
    res5 = exact_calibrate(CalibrationTarget(300, 300, 5))
    rows.append(_row("dilute beta1 near k/n1", 5.0 / 300.0, res5.beta1, 0.30,
                     abs(res5.beta1 / (5.0 / 300.0) - 1.0) <= 0.30))
    # count-growth consistency: log-count rate e(1) at the typical density
    n = int(config.get("n", 300))
    k = typical_vertex_count(n)
    t = CalibrationTarget(n, n, k)
    pred = predicted_log_pnk(t, exact_calibrate(t), with_llt=False)
    rate = pred / n ** (2.0 / 3.0)
    target = e_of_ell(1.0)
    rows.append(_row("log-count rate near e(1)", target, rate, 0.10,
                     abs(rate / target - 1.0) <= 0.10))
    return rows


def _suite_shapes(config):
    rows = []
    rng = np.random.default_rng(int(config.get("seed", 0)))
    worst = 0.0
    for th in rng.uniform(0.0, 50.0, 1000):
        x, y = ShapeCurve.parabola().point(th / (1.0 + th))
        worst = max(worst, abs(math.sqrt(y) + math.sqrt(1.0 - x) - 1.0))
    rows.append(_row("parabola on-curve identity", 0.0, worst, 1e-12,
                     worst <= 1e-12))

    from .shapes import mixed_length
    L0 = mixed_length(0.0)
    L0_target = 1.0 + math.log(1.0 + math.sqrt(2.0)) / math.sqrt(2.0)
    rows.append(_row("mixed length at 0", L0_target, L0, 1e-9,
                     abs(L0 - L0_target) <= 1e-9))

    pts = ShapeCurve.mixed(0.0).sample(1000)
    gap = float(np.abs(
        pts[:, 1] - (1.0 - np.sqrt(np.clip(1.0 - pts[:, 0], 0.0, None))) ** 2
    ).max())
    rows.append(_row("mixed(0) equals parabola", 0.0, gap, 1e-6, gap <= 1e-6))

    cpts = ShapeCurve.circle().sample(1000)
    resid = float(np.abs(cpts[:, 0] ** 2 + (cpts[:, 1] - 1.0) ** 2 - 1.0).max())
    rows.append(_row("circle identity", 0.0, resid, 1e-12, resid <= 1e-12))
    return rows


def _suite_jarnik(config):
    seed = int(config.get("seed", 0))
    samples = int(config.get("samples", 100))
    report = run_jarnik(0.05, samples=samples, seed=seed)
    rows = list(report["rows"])
    d_coarse = run_jarnik(0.1, samples=samples, seed=seed)
    d_fine = run_jarnik(0.02, samples=samples, seed=seed)
    med_hi = next(r["observed"] for r in d_coarse["rows"]
                  if r["check"] == "median circle distance")
    med_lo = next(r["observed"] for r in d_fine["rows"]
                  if r["check"] == "median circle distance")
    rows.append(_row("circle distance shrinks with beta", 1.0,
                     med_lo / med_hi, 0.0, med_lo < med_hi))
    return rows


def _suite_mixed(config):
    from .shapes import mixed_length
    rows = []
    grid = [0.0, 1.0, 10.0, 100.0]
    vals = [mixed_length(v) for v in grid]
    dec = all(a > b for a, b in zip(vals, vals[1:]))
    rows.append(_row("length decreases toward pi/2", math.pi / 2.0, vals[-1],
                     5e-3, dec and abs(vals[-1] - math.pi / 2.0) <= 5e-3))
    pts = ShapeCurve.mixed(1e3).sample(500)
    gap = float(np.abs(
        pts[:, 1] - (1.0 - np.sqrt(np.clip(1.0 - pts[:, 0] ** 2, 0.0, None)))
    ).max())
    rows.append(_row("large-lambda curve is the circle", 0.0, gap, 1e-2,
                     gap <= 1e-2))
    end = ShapeCurve.mixed(-0.6).point(1.0)
    err = max(abs(end[0] - 1.0), abs(end[1] - 1.0))
    rows.append(_row("negative-lambda branch endpoint", 0.0, err, 1e-8,
                     err <= 1e-8))
    return rows


SUITE_NAMES = ("counting", "calibration", "shapes", "jarnik", "mixed")

_SUITES = {
    "counting": _suite_counting,
    "calibration": _suite_calibration,
    "shapes": _suite_shapes,
    "jarnik": _suite_jarnik,
    "mixed": _suite_mixed,
}


def run_suite(name, config=None):
    """Execute one named check suite; see SUITE_NAMES for the catalogue."""
    if name not in _SUITES:
        raise KeyError(
            f"unknown suite {name!r}; available: {', '.join(SUITE_NAMES)}")
    config = dict(config or {})
    rows = _sorted_rows(_SUITES[name](config))
    return {
        "suite": name,
        "config": {k: config[k] for k in sorted(config)},
        "rows": rows,
        "passed": all(r["pass"] for r in rows),
    }


def report_json(report):
    """Canonical JSON text for a suite or experiment report."""
    return json.dumps(report, indent=2, sort_keys=False) + "\n"
