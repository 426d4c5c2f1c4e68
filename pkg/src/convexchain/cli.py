"""Command-line interface.

Subcommands cover the library surface: exact counting, calibration, the two
samplers, shape distances, the asymptotic-constant table, the length-model
runner, the mixed-curve family, and the named check suites.  All state comes
from flags or an optional ``--config`` file of ``key=value`` lines (explicit
flags win); stochastic commands default to seed 0, never wall clock.

Exit codes: 0 success / all checks pass, 1 check or assertion failure,
2 usage or configuration error.
"""

import argparse
import json
import math
import sys

import numpy as np

from .calibrate import (
    CalibrationError,
    CalibrationTarget,
    asymptotic_params,
    exact_calibrate,
)
from .counting import count_lines_k, max_vertices
from .experiments import (
    SUITE_NAMES,
    _child_seed,
    run_jarnik,
    run_suite,
    sample_valtr,
)
from .gibbs import DEFAULT_TRUNCATION, EnergyModel, GibbsParams, sample_omega
from .lattice import ConvexPolyline
from .shapes import (
    ShapeCurve,
    curve_csv,
    hausdorff_distance,
    mixed_length,
    normalize,
    overlay_svg,
)
from .specialfn import AsymptoticProfile

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(payload):
    return json.dumps(payload, indent=2) + "\n"


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_count(args):
    table = count_lines_k(args.n1, args.n2, args.kmax)
    if args.format == "json":
        rows = [[a, b, k, c] for a, b, k, c in table.csv_rows()]
        text = _json({"n1": args.n1, "n2": args.n2, "kmax": args.kmax,
                      "rows": rows})
    else:
        lines = ["n1,n2,k,count"]
        lines += [f"{a},{b},{k},{c}" for a, b, k, c in table.csv_rows()]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_maxvert(args):
    m = max_vertices(args.n1, args.n2)
    _emit(_json({"n1": args.n1, "n2": args.n2, "max_vertices": m}), args.out)
    return 0


def _cmd_calibrate(args):
    target = CalibrationTarget(args.n1, args.n2, args.k)
    if args.exact:
        res = exact_calibrate(target, trunc=args.trunc)
        payload = {
            "mode": "exact",
            "beta1": res.beta1,
            "beta2": res.beta2,
            "fugacity": res.fugacity,
            "residuals": list(res.residuals),
            "iterations": res.iterations,
            "free_energy": res.free_energy,
            "converged": res.converged,
        }
    else:
        b1, b2, lam = asymptotic_params(target)
        payload = {"mode": "asymptotic", "beta1": b1, "beta2": b2,
                   "fugacity": lam}
    _emit(_json(payload), args.out)
    return 0


def _cmd_sample_gibbs(args):
    params = GibbsParams(EnergyModel.linear(args.beta1, args.beta2),
                         args.fugacity, args.trunc)
    echo = {"beta1": args.beta1, "beta2": args.beta2,
            "fugacity": args.fugacity, "truncation": args.trunc}
    lines = []
    for i in range(args.count):
        child = _child_seed(args.seed, i)
        omega = sample_omega(params, child)
        lines.append(json.dumps({
            "seed": child,
            "params": echo,
            "support": [[x[0], x[1], m] for x, m in omega.items_slope_sorted()],
        }))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_sample_valtr(args):
    lines = []
    for i in range(args.count):
        child = _child_seed(args.seed, i)
        poly = sample_valtr(args.n, args.k, seed=child)
        lines.append(json.dumps({
            "seed": child,
            "n": args.n,
            "k": args.k,
            "vertices": [[p[0], p[1]] for p in poly.vertices],
        }))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _load_polyline(path):
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path) as fh:
            text = fh.read()
    return ConvexPolyline.from_json(text)


def _make_curve(args):
    if args.curve == "parabola":
        return ShapeCurve.parabola(args.ratio)
    if args.curve == "circle":
        return ShapeCurve.circle()
    return ShapeCurve.mixed(args.lambda_ell)


def _cmd_shape_distance(args):
    poly = _load_polyline(args.line)
    if args.scale == "auto":
        scale = poly.endpoint()
        if scale[0] == 0 or scale[1] == 0:
            raise UsageError("cannot auto-scale a line with a zero endpoint "
                             "coordinate; pass --scale n1,n2")
    else:
        parts = args.scale.split(",")
        if len(parts) != 2:
            raise UsageError(f"--scale expects 'n1,n2', got {args.scale!r}")
        scale = (float(parts[0]), float(parts[1]))
    curve = _make_curve(args)
    d = hausdorff_distance(normalize(poly, scale), curve, args.mesh)
    payload = {"curve": args.curve, "mesh": args.mesh,
               "scale": [scale[0], scale[1]], "distance": d}
    if args.assert_below is not None:
        payload["assert_below"] = args.assert_below
        payload["pass"] = d <= args.assert_below
    if args.format == "svg":
        _emit(overlay_svg(normalize(poly, scale), curve, args.mesh), args.out)
    else:
        _emit(_json(payload), args.out)
    if args.assert_below is not None and d > args.assert_below:
        return 1
    return 0


def _parse_grid(spec):
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"--ell-grid expects 'start:stop:step', got {spec!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"non-numeric --ell-grid component in {spec!r}") from None
    if step <= 0 or b < a:
        raise UsageError(f"--ell-grid needs stop >= start and step > 0, got {spec!r}")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return [a + i * step for i in range(n)]


def _cmd_asymptotics_table(args):
    rows = [AsymptoticProfile.at(ell) for ell in _parse_grid(args.ell_grid)]
    if args.format == "json":
        text = _json({"rows": [
            {"ell": r.ell, "c": r.c_value, "e": r.e_value} for r in rows]})
    else:
        lines = ["ell,c,e"]
        lines += [f"{r.ell:.12g},{r.c_value:.12g},{r.e_value:.12g}"
                  for r in rows]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_jarnik(args):
    report = run_jarnik(args.beta, fugacity=args.fugacity,
                        samples=args.samples, seed=args.seed,
                        truncation=args.trunc, mesh=args.mesh)
    _emit(_json(report), args.out)
    return 0 if report["passed"] else 1


def _cmd_mixed_shapes(args):
    grid = []
    for piece in args.grid.split(","):
        try:
            grid.append(float(piece))
        except ValueError:
            raise UsageError(f"non-numeric grid entry {piece!r}") from None
    if args.format == "svg":
        # all curves of the grid in one picture
        body = ['<svg xmlns="http://www.w3.org/2000/svg" '
                'viewBox="-0.05 -0.05 1.1 1.1" width="440" height="440">',
                '<rect x="0" y="0" width="1" height="1" fill="none" '
                'stroke="#cccccc" stroke-width="0.002"/>']
        for ell in grid:
            pts = ShapeCurve.mixed(ell).sample(args.mesh)
            path = " ".join(f"{x:.6f},{1.0 - y:.6f}" for x, y in pts)
            body.append(f'<polyline points="{path}" fill="none" '
                        'stroke="#1f77b4" stroke-width="0.003"/>')
        body.append("</svg>")
        text = "\n".join(body) + "\n"
    elif args.format == "json":
        text = _json({"rows": [
            {"lambda_ell": ell, "length": mixed_length(ell)} for ell in grid]})
    else:
        lines = ["lambda_ell,length"]
        lines += [f"{ell:.12g},{mixed_length(ell):.12g}" for ell in grid]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_curve(args):
    curve = _make_curve(args)
    if args.format == "svg":
        empty = normalize(np.zeros((1, 2)), (1.0, 1.0))
        _emit(overlay_svg(empty, curve, args.mesh), args.out)
    else:
        _emit(curve_csv(curve, args.mesh), args.out)
    return 0


def _cmd_suite(args):
    config = {"seed": args.seed}
    if args.samples is not None:
        config["samples"] = args.samples
    report = run_suite(args.name, config)
    _emit(_json(report), args.out)
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------
# parser assembly


def _add_out(p, formats=("json",)):
    p.add_argument("--out", default=None, help="write output to this path")
    if formats:
        p.add_argument("--format", choices=list(formats), default=formats[0])


def build_parser():
    top = argparse.ArgumentParser(
        prog="convexchain",
        description="Convex lattice polygonal lines: counting, sampling, "
                    "calibration, limit shapes.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="exact vertex-count table")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    _add_out(p, ("csv", "json"))
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("maxvert", help="maximal vertex count for an endpoint")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    _add_out(p)
    p.set_defaults(func=_cmd_maxvert)

    p = sub.add_parser("calibrate", help="parameters matching target moments")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--exact", action="store_true",
                   help="Newton refinement instead of the asymptotic formulas")
    p.add_argument("--trunc", type=float, default=DEFAULT_TRUNCATION)
    _add_out(p)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("sample-gibbs", help="draw from the product measure")
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float, required=True)
    p.add_argument("--fugacity", type=float, default=1.0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trunc", type=float, default=DEFAULT_TRUNCATION)
    _add_out(p, formats=())
    p.set_defaults(func=_cmd_sample_gibbs)

    p = sub.add_parser("sample-valtr", help="uniform strictly North-East lines")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _add_out(p, formats=())
    p.set_defaults(func=_cmd_sample_valtr)

    p = sub.add_parser("shape-distance",
                       help="Hausdorff distance from a line to a limit curve")
    p.add_argument("--line", required=True,
                   help="path of a polyline JSON file, or - for stdin")
    p.add_argument("--curve", choices=("parabola", "circle", "mixed"),
                   default="parabola")
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--lambda-ell", type=float, default=0.0)
    p.add_argument("--scale", default="auto",
                   help="'n1,n2' or 'auto' for the line's own endpoint")
    p.add_argument("--mesh", type=int, default=1000)
    p.add_argument("--assert-below", type=float, default=None,
                   help="exit 1 unless the distance is at most this")
    _add_out(p, ("json", "svg"))
    p.set_defaults(func=_cmd_shape_distance)

    p = sub.add_parser("asymptotics-table",
                       help="constants c and e on a density grid")
    p.add_argument("--ell-grid", required=True, metavar="START:STOP:STEP")
    _add_out(p, ("csv", "json"))
    p.set_defaults(func=_cmd_asymptotics_table)

    p = sub.add_parser("jarnik", help="Euclidean-length model checks")
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--fugacity", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trunc", type=float, default=DEFAULT_TRUNCATION)
    p.add_argument("--mesh", type=int, default=1000)
    _add_out(p)
    p.set_defaults(func=_cmd_jarnik)

    p = sub.add_parser("mixed-shapes", help="mixed-curve family table or plot")
    p.add_argument("--grid", default="0,0.5,1,2,10",
                   help="comma-separated lambda_ell values")
    p.add_argument("--mesh", type=int, default=200)
    _add_out(p, ("csv", "json", "svg"))
    p.set_defaults(func=_cmd_mixed_shapes)

    p = sub.add_parser("curve", help="samples of a single limit curve")
    p.add_argument("--curve", choices=("parabola", "circle", "mixed"),
                   default="parabola")
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--lambda-ell", type=float, default=0.0)
    p.add_argument("--mesh", type=int, default=200)
    _add_out(p, ("csv", "svg"))
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("suite", help="named acceptance-check suites")
    p.add_argument("--name", choices=SUITE_NAMES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=None)
    _add_out(p)
    p.set_defaults(func=_cmd_suite)

    return top


def _splice_config(argv):
    """Expand --config FILE into key=value flags placed before explicit ones."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    if not rest:
        raise UsageError("--config requires a subcommand")
    try:
        with open(path) as fh:
            raw_lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from None
    extra = []
    for lineno, raw in enumerate(raw_lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(
                f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, val = line.split("=", 1)
        extra.extend([f"--{key.strip().replace('_', '-')}", val.strip()])
    return [rest[0], *extra, *rest[1:]]


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    try:
        argv = _splice_config(list(argv))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CalibrationError as exc:
        print(_json({"error": str(exc)}), end="", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
