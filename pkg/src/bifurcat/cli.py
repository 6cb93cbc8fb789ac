"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 elimination
budget exceeded.  Floats are written with 17 significant digits and rows
in a fixed order, so repeated runs give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from importlib import resources
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import atlas, dynamics
from .equilibria import eliminated_variety, fixed_points
from .exactalg.groebner import BudgetExceeded
from .exactalg.poly import as_rational
from .model import ModelParams, State, load_params

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_BUDGET = 0, 2, 3, 4
DEFAULT_PARAMS = "params/zhoufan_corrected.json"

# fixed palette, keyed by region name
PALETTE = {
    "I": "#8dd3c7", "II": "#ffffb3", "III": "#bebada", "IV": "#fb8072",
    "V": "#80b1d3", "VI": "#fdb462", "VIa": "#b3de69", "boundary": "#000000",
}
CURVE_COLORS = {"R0=1": "#d62728", "Delta=0": "#1f77b4", "TrE2=0": "#2ca02c", "B=0": "#7f7f7f"}


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _json_ready(obj.real), "im": _json_ready(obj.imag)}
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _FLOAT_MARK + fmt(x) if np.isfinite(x) else str(x)
    return str(obj)


_FLOAT_MARK = "\x00f"
_FLOAT_RE = re.compile(r'"\\u0000f([^"]*)"')


def dumps(obj) -> str:
    """JSON with every finite float printed to 17 significant digits."""
    text = json.dumps(_json_ready(obj), indent=2)
    return _FLOAT_RE.sub(r"\1", text) + "\n"


def rational(text: str):
    try:
        return as_rational(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational literal: {text!r}") from exc


def pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers: {text!r}")
    return tuple(rational(x) for x in parts)


def window(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected w0,w1,a0,a1: {text!r}")
    return tuple(float(rational(x)) for x in parts)


def _params(args) -> ModelParams:
    path = args.params
    if path is None:
        if Path(DEFAULT_PARAMS).exists():
            path = DEFAULT_PARAMS
        else:
            path = resources.files("bifurcat") / "params" / "zhoufan_corrected.json"
    if not Path(str(path)).exists():
        raise UsageError(f"params file not found: {path}")
    return load_params(str(path))


def _treated(args) -> ModelParams:
    return _params(args).with_treatment(args.omega, args.alpha)


def _write(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if not isinstance(x, str) else x for x in row])
    return buf.getvalue()


def curve_filename(kind: str) -> str:
    return "curve_" + kind.replace("=", "_") + ".csv"


# -- commands ------------------------------------------------------------------------------

def cmd_atlas(args) -> int:
    p = _params(args)
    m = atlas.build_map(p, args.window, (args.res, args.res), tol=args.tol, curve_samples=args.samples)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = ((w, a, m.labels[k, j]) for k, w in enumerate(m.omegas) for j, a in enumerate(m.alphas))
    _write(_csv(["omega", "alpha", "label"], rows), str(out / "regions.csv"))
    for kind, c in m.curves.items():
        _write(_csv(["omega", "alpha"], ((float(w), float(a)) for w, a in c.points)), str(out / curve_filename(kind)))
    _write(dumps({k: _corner_json(c) for k, c in m.corners.items()}), str(out / "corners.json"))
    if args.svg:
        _write(render_svg(m), str(out / "map.svg"))
    summary = {"window": m.window, "resolution": m.resolution, "counts": m.counts(), "components": m.components}
    _write(dumps(summary), None)
    return EXIT_OK


def _corner_json(c: atlas.CornerPoint) -> dict:
    d = {"name": c.name, "omega": c.omega, "alpha": c.alpha,
         "defining_equations": list(c.defining_equations), "residuals": list(c.residuals)}
    if c.exact is not None:
        d["exact"] = [str(c.exact[0]), str(c.exact[1])]
    return d


def cmd_corners(args) -> int:
    p = _params(args)
    pts = atlas.corner_points(p)
    _write(dumps([_corner_json(c) for c in sorted(pts.values(), key=lambda c: c.omega)]), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    p = _params(args)
    lab = atlas.classify_region(p, args.omega, args.alpha, args.tol)
    if args.report == "json":
        q = p.with_treatment(args.omega, args.alpha)
        doc = {"omega": float(args.omega), "alpha": float(args.alpha), "label": lab.name,
               "signs": dict(zip(("Delta", "R0-1", "TrE2", "B"), lab.signs)),
               "fixed_points": [fp.to_json() for fp in fixed_points(q.as_float())]}
        _write(dumps(doc), args.out)
    else:
        _write(lab.name + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    p = _treated(args)
    s0, i0 = args.x0
    tr = dynamics.integrate(p, State(float(s0), float(i0)), (0.0, float(args.tmax)), args.tol,
                            reverse=args.reverse_time, dense=False)
    rows = ((t, x[0], x[1]) for t, x in zip(tr.times, tr.states))
    _write(_csv(["t", "s", "i"], rows), args.out)
    return EXIT_OK


def cmd_cycle(args) -> int:
    p = _treated(args)
    guess = State(float(args.guess[0]), float(args.guess[1])) if args.guess else None
    section = float(args.section_i) if args.section_i is not None else None
    c = dynamics.find_limit_cycle(p, guess, section, reverse=args.reverse_time, tol=args.tol)
    doc = {"omega": float(args.omega), "alpha": float(args.alpha), **c.to_json(), "notes": c.notes}
    if not args.samples:
        doc.pop("samples")
    _write(dumps(doc), args.out)
    return EXIT_OK


def cmd_points_table(args) -> int:
    p = _params(args)
    rows = atlas.named_points(p)
    doc = [r.to_json() for r in rows]
    lines = [f"{'name':<6} {'omega':>24} {'alpha':>24}  description"]
    for r in rows:
        lines.append(f"{r.name:<6} {fmt(r.omega):>24} {fmt(r.alpha):>24}  {r.description}")
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write(dumps(doc), str(out / "points.json"))
        _write(text, str(out / "points.txt"))
    else:
        _write(text, None)
    return EXIT_OK if all(r.status == "ok" for r in rows) else EXIT_NUMERIC


def cmd_variety(args) -> int:
    p = _params(args)
    budget = args.budget
    v = eliminated_variety(p, args.kind, method=args.method, second=args.second,
                           **({"budget": budget} if budget else {}))
    doc = {"kind": v.kind, "method": v.method, "symbols": list(v.symbols), "nterms": v.poly.nterms(),
           "factors": [{"name": n, "multiplicity": k, "nterms": f.nterms()} for n, f, k in v.factors]}
    _write(dumps(doc), args.out)
    if args.dump_poly:
        _write(v.poly.to_str() + "\n", args.dump_poly)
    return EXIT_OK


# -- svg --------------------------------------------------------------------------------------

def render_svg(m: atlas.AtlasMap, size: int = 600, cells: int = 100) -> str:
    """Region raster (downsampled), curves and labelled corners."""
    w0, w1, a0, a1 = m.window
    sx = lambda w: (w - w0) / (w1 - w0) * size
    sy = lambda a: size - (a - a0) / (a1 - a0) * size
    nw, na = m.labels.shape
    kw, ka = max(1, nw // cells), max(1, na // cells)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">']
    cw, ch = size * kw / nw, size * ka / na
    for k in range(0, nw, kw):
        for j in range(0, na, ka):
            lab = str(m.labels[k, j])
            color = PALETTE.get(lab, PALETTE["boundary"])
            out.append(f'<rect x="{k / nw * size:.3f}" y="{size - (j + ka) / na * size:.3f}" '
                       f'width="{cw:.3f}" height="{ch:.3f}" fill="{color}"/>')
    for kind, c in m.curves.items():
        pts = [(float(w), float(a)) for w, a in c.points if w0 <= float(w) <= w1 and a0 <= float(a) <= a1]
        if kind == "Delta=0" or kind == "TrE2=0":
            for q in pts:
                out.append(f'<circle cx="{sx(q[0]):.3f}" cy="{sy(q[1]):.3f}" r="0.8" '
                           f'fill="{CURVE_COLORS[kind]}"/>')
        elif pts:
            path = " ".join(f"{sx(w):.3f},{sy(a):.3f}" for w, a in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{CURVE_COLORS[kind]}" stroke-width="1"/>')
    for name, c in m.corners.items():
        out.append(f'<circle cx="{sx(c.omega):.3f}" cy="{sy(c.alpha):.3f}" r="3" fill="black"/>')
        out.append(f'<text x="{sx(c.omega) + 4:.3f}" y="{sy(c.alpha) - 4:.3f}" font-size="10">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- parser -------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bifurcat", description="Bifurcation analysis of the treated SIR model.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, helptext):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--params", default=None, help=f"parameter JSON (default {DEFAULT_PARAMS})")
        sp.set_defaults(func=fn)
        return sp

    def plane(sp):
        sp.add_argument("--omega", type=rational, required=True)
        sp.add_argument("--alpha", type=rational, required=True)

    sp = add("atlas", cmd_atlas, "region map, curves and corners")
    sp.add_argument("--window", type=window, default=(0.0, 14.0, 0.0, 14.0))
    sp.add_argument("--res", type=int, default=400)
    sp.add_argument("--samples", type=int, default=400)
    sp.add_argument("--tol", type=float, default=atlas.DEFAULT_TOL)
    sp.add_argument("--svg", action="store_true")
    sp.add_argument("--out", required=True)

    sp = add("corners", cmd_corners, "H, B1, B2 and BT")
    sp.add_argument("--out", default=None)

    sp = add("classify", cmd_classify, "region label of one (omega, alpha)")
    plane(sp)
    sp.add_argument("--tol", type=float, default=atlas.DEFAULT_TOL)
    sp.add_argument("--report", choices=("text", "json"), default="text")
    sp.add_argument("--out", default=None)

    sp = add("simulate", cmd_simulate, "integrate a trajectory to CSV")
    plane(sp)
    sp.add_argument("--x0", type=pair, required=True)
    sp.add_argument("--tmax", type=rational, required=True)
    sp.add_argument("--tol", type=float, default=dynamics.PLOT_TOL)
    sp.add_argument("--reverse-time", action="store_true")
    sp.add_argument("--out", default=None)

    sp = add("cycle", cmd_cycle, "limit cycle, period and Floquet exponents")
    plane(sp)
    sp.add_argument("--guess", type=pair, default=None)
    sp.add_argument("--section-i", type=rational, default=None)
    sp.add_argument("--tol", type=float, default=dynamics.CYCLE_TOL)
    sp.add_argument("--reverse-time", action="store_true")
    sp.add_argument("--samples", action="store_true", help="include the sampled loop")
    sp.add_argument("--out", default=None)

    sp = add("points-table", cmd_points_table, "named points with residuals")
    sp.add_argument("--out", default=None, help="directory for points.json and points.txt")

    sp = add("variety", cmd_variety, "eliminated trace or determinant variety")
    sp.add_argument("--kind", choices=("traceG", "detG"), default="traceG")
    sp.add_argument("--method", choices=("groebner", "resultant"), default="groebner")
    sp.add_argument("--second", choices=("alpha", "eta"), default="alpha")
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--dump-poly", default=None, help="write the canonical polynomial text here")
    sp.add_argument("--out", default=None)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
