"""``symcalc`` command line: extract, verify, dirac, classify.

Exit codes: 0 when every check passes, 1 on a verification failure,
2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .. import __version__
from ..dirac import build_dirac, full_symbol, null_vector
from ..errors import InputError, VerificationError
from ..geometry import check_lorentzian, extract_metric
from ..spin_structure import ReferencePair, chi_c, chi_t, classify
from ..symbol_core import check_nondegeneracy, standard_points
from .catalog import load_scenario
from .runner import SUITES, geometry_summary, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _write(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _floats(text: str, n: int) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise InputError(f"expected {n} comma-separated numbers, got {len(vals)}")
    return np.array(vals)


def cmd_extract(args) -> int:
    sc = load_scenario(args.scenario)
    if args.grid is not None:
        sc.grid = args.grid
    op = sc.operator()
    pts = standard_points()
    check_nondegeneracy(op, pts)
    check_lorentzian(extract_metric(op), pts)
    _write({"version": "1", "tool_version": __version__, "scenario": sc.to_dict(),
            "geometry": geometry_summary(op, sc.grid)}, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = load_scenario(args.scenario)
    if args.tol_scale <= 0:
        raise InputError("--tol-scale must be positive")
    report = run_suite(sc, args.suite, seed=args.seed, tol_scale=args.tol_scale)
    text = report.to_json()
    if args.out is None or args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_dirac(args) -> int:
    sc = load_scenario(args.scenario)
    p = _floats(args.momentum, 4)
    x = _floats(args.point, 4) if args.point else np.zeros(4)
    D = build_dirac(sc.operator(), args.mass)
    M = full_symbol(D, x, p)
    u, sv = null_vector(D, p, x)
    payload = {
        "scenario": sc.name,
        "mass": D.m,
        "momentum": p.tolist(),
        "point": x.tolist(),
        "det_full_symbol": [float(np.linalg.det(M).real), float(np.linalg.det(M).imag)],
        "min_singular_value_ratio": float(sv),
        "null_vector": [[float(c.real), float(c.imag)] for c in u],
    }
    _write(payload, args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    sc = load_scenario(args.scenario)
    ref = ReferencePair(load_scenario(args.reference).operator())
    op = sc.operator()
    pts = standard_points()
    tag = classify(ref, op, pts)
    c = chi_c(ref, op, pts)
    t = chi_t(ref, op, pts)
    _write({"scenario": sc.name, "reference": args.reference, "tag": list(tag.as_tuple()),
            "c_range": [float(c.min()), float(c.max())], "t_range": [float(t.min()), float(t.max())]}, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symcalc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"symcalc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="metric, frame and potential at grid points")
    p.add_argument("--scenario", required=True)
    p.add_argument("--grid", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--scenario", required=True)
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol-scale", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dirac", help="full Dirac symbol and its kernel at one momentum")
    p.add_argument("--scenario", required=True)
    p.add_argument("--mass", type=float, required=True)
    p.add_argument("--momentum", required=True, help="p1,p2,p3,p4")
    p.add_argument("--point", help="x1,x2,x3,x4 (default origin)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_dirac)

    p = sub.add_parser("classify", help="spin-structure tag relative to a reference")
    p.add_argument("--scenario", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"symcalc: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as exc:
        print(f"symcalc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"symcalc: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
