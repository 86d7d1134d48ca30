"""Command-line front end.

Exit codes: 0 success (or the checked inequality holds), 1 checked and
failed or inconclusive, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import extremal
from .isoperimetric import closed_length, random_short_polygon, sample_closed_polygon, smallest_enclosing_cap
from .lens import find_h0, h, zeta0, zeta1
from .polycurve import (
    AntipodalNeighbors,
    DegenerateCurve,
    cut_against_ray,
    is_convex_at,
    natural_partition,
    normalize,
    polygon_from_json,
    polygon_to_json,
)
from .verify import CHECKS, OmittedValueViolation, PreconditionFail, get_map, map_from_spec

DEFAULT_TOL = 1e-8
TWO_PI = 2.0 * math.pi


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0 or not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text!r}")
    return x


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            x = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if x < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}, got {x}")
        return x

    return parse


def _m_list(text: str) -> list[int]:
    parse = _int_at_least(1)
    return [parse(part) for part in text.split(",") if part.strip()]


def _default_tol() -> float:
    env = os.environ.get("RATIO_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        return _positive_float(env)
    except argparse.ArgumentTypeError:
        return DEFAULT_TOL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--tol", type=_positive_float, default=None,
        help=f"quadrature/optimizer tolerance (default {DEFAULT_TOL:g}, or $RATIO_TOL)",
    )
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="output format (default json)")
    common.add_argument("--output", default=None, help="write to this file instead of stdout")

    p = argparse.ArgumentParser(
        prog="arearatio",
        description="Spherical area/length computations and inequality checks for maps of the disk.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("h0", parents=[common], help="maximise h over [0, 1]")

    t = sub.add_parser("h-table", parents=[common], help="tabulate zeta0, zeta1 and h on a tau grid")
    t.add_argument("--n", type=_int_at_least(2), default=11, help="grid size, at least 2 (default 11)")

    e = sub.add_parser("extremal", parents=[common], help="area, length, ratio and deficit of the extremal family")
    e.add_argument("--m", type=_m_list, default=[1, 10, 100, 1000, 10000], help="comma-separated m values, each >= 1")

    v = sub.add_parser("verify", parents=[common], help="check an inequality on a map")
    src = v.add_mutually_exclusive_group(required=True)
    src.add_argument("--map", help="built-in map name")
    src.add_argument("--map-file", help='JSON map spec: {"kind": "polynomial", "coeffs": [...]} or {"kind": "builtin", "name": ...}')
    v.add_argument("--which", choices=sorted(CHECKS), default="main", help="which inequality (default main)")

    r = sub.add_parser("rado", parents=[common], help="hemisphere containment of random short closed polygons")
    r.add_argument("--count", type=_int_at_least(1), default=1000, help="number of polygons, at least 1 (default 1000)")

    c = sub.add_parser("classify", parents=[common], help="natural partition, convexity and ray cut of a polygon")
    c.add_argument("polygon", help='JSON file: {"vertices": [{"re": x, "im": y} | "inf", ...], "closed": true}')
    return p


def _emit(rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        payload = rows[0] if len(rows) == 1 else rows
        out.write(json.dumps(payload, indent=2, default=_json_default) + "\n")
        return
    buf = io.StringIO()
    fields = list(rows[0]) if rows else []
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _csv_cell(v) for k, v in row.items()})
    out.write(buf.getvalue())


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, default=_json_default)
    return v


def cmd_h0(args) -> tuple[list[dict], int]:
    r = find_h0(args.tol)
    return [{"tau0": r.tau0, "h0": r.h0, "iterations": r.iterations, "bracket_width": r.bracket_width,
             "l0": r.l0, "A0": r.A0}], 0


def cmd_h_table(args) -> tuple[list[dict], int]:
    tau = np.linspace(0.0, 1.0, args.n)
    z0, z1, hv = zeta0(tau), zeta1(tau), h(tau)
    rows = [{"tau": float(t), "zeta0": float(a), "zeta1": float(b), "h": float(c)}
            for t, a, b, c in zip(tau, z0, z1, hv)]
    return rows, 0


def cmd_extremal(args) -> tuple[list[dict], int]:
    rows = [{"m": m, "area": extremal.area(m), "length": extremal.length(m),
             "ratio": extremal.ratio(m), "deficit": extremal.deficit(m)} for m in args.m]
    return rows, 0


def cmd_verify(args) -> tuple[list[dict], int]:
    if args.map is not None:
        f = get_map(args.map)
    else:
        with open(args.map_file) as fh:
            f = map_from_spec(json.load(fh))
    try:
        report = CHECKS[args.which](f, args.tol)
    except (OmittedValueViolation, PreconditionFail) as exc:
        return [{"map_label": f.label, "check": args.which, "error": type(exc).__name__,
                 "message": str(exc)}], 1
    return [report.to_dict()], 0 if report.status == "holds" else 1


def cmd_rado(args) -> tuple[list[dict], int]:
    rng = np.random.default_rng(args.seed)
    margins, lengths = [], []
    for k in range(args.count):
        verts = random_short_polygon(rng, TWO_PI - 0.01)
        cap = smallest_enclosing_cap(sample_closed_polygon(verts), seed=args.seed + k)
        margins.append(cap.margin)
        lengths.append(closed_length(verts))
    ok = all(m > 0 for m in margins)
    row = {"seed": args.seed, "count": args.count, "min_margin": min(margins),
           "max_length": max(lengths), "all_positive": ok}
    return [row], 0 if ok else 1


def cmd_classify(args) -> tuple[list[dict], int]:
    with open(args.polygon) as fh:
        poly = normalize(polygon_from_json(json.load(fh)))
    part = natural_partition(poly)
    convexity = []
    for i in range(poly.n_vertices):
        try:
            convexity.append(is_convex_at(poly, i))
        except (AntipodalNeighbors, ValueError):
            convexity.append(None)
    cut = cut_against_ray(poly)
    pt = lambda p: None if p is None else ("inf" if p.is_infinity else [p.value.real, p.value.imag])
    row = {
        "normalized": polygon_to_json(poly),
        "length": poly.length,
        "natural_vertices": part.natural_vertices,
        "natural_edges": [{"start": e.start, "end": e.end, "length": e.length} for e in part.edges],
        "convexity": convexity,
        "ray_arcs": [{"on_ray": a.on_ray, "length": a.length, "start": pt(a.start), "end": pt(a.end)}
                     for a in cut.arcs],
        "ray_contacts": [pt(p) for p in cut.contacts],
    }
    return [row], 0


COMMANDS = {
    "h0": cmd_h0,
    "h-table": cmd_h_table,
    "extremal": cmd_extremal,
    "verify": cmd_verify,
    "rado": cmd_rado,
    "classify": cmd_classify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is None:
        args.tol = _default_tol()
    try:
        rows, code = COMMANDS[args.command](args)
    except KeyError as exc:
        parser.exit(2, f"{parser.prog}: error: {exc.args[0]}\n")
    except (OSError, json.JSONDecodeError, DegenerateCurve, ValueError) as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")
    if args.output:
        with open(args.output, "w", newline="") as fh:
            _emit(rows, args.format, fh)
    else:
        _emit(rows, args.format, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
