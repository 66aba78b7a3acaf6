"""``weyl3``: build reduced-holonomy Weyl structures from expressions and verify them.

Exit status is 0 when every check passes, 1 when a check fails and 2 for usage,
parse or domain-guard errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Sequence

import numpy as np

from . import __version__
from . import dkp
from . import families as fam
from .errors import Weyl3Error
from .fields import ScalarField, parse_field
from .holonomy import MEMBERSHIP_TOL, classify, connection_vectors
from .suite import BLOCKS, DEFAULT_SEED, CheckRecord, run_suite
from .weyl import EUCLIDEAN, LORENTZIAN, Domain, WeylStructure, solve_connection

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FIELD_FLAGS = ("H", "K", "L", "F", "G", "f")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument helpers

def _box(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad box {text!r}") from None
    if len(vals) != 6 or any(a >= b for a, b in zip(vals[0::2], vals[1::2])):
        raise argparse.ArgumentTypeError("box must be xmin,xmax,ymin,ymax,zmin,zmax with min < max")
    return vals


def _sign(text: str) -> int:
    table = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    if text not in table:
        raise argparse.ArgumentTypeError("sign must be + or -")
    return table[text]


def _fields(args) -> dict[str, ScalarField]:
    out = {}
    for name in FIELD_FLAGS:
        text = getattr(args, "field_" + name)
        if text is not None:
            out[name] = parse_field(text)
    return out


def _spec(args) -> fam.FamilySpec:
    if args.family is None:
        raise UsageError("--family is required")
    fields = _fields(args)
    missing = [n for n in fam.REQUIRED[args.family] if n not in fields]
    if missing:
        raise UsageError(f"family {args.family} needs --{' --'.join(missing)}")
    extra = sorted(set(fields) - set(fam.REQUIRED[args.family]))
    if extra:
        raise UsageError(f"family {args.family} does not use --{' --'.join(extra)}")
    return fam.FamilySpec(args.family, fields, q=args.q, sign=args.sign, box=args.box, cross=args.cross)


def _triple(text: str) -> tuple[ScalarField, ...]:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated expressions, got {text!r}")
    return tuple(parse_field(p) for p in parts)


def _explicit_structure(args) -> WeylStructure:
    rows = args.coframe.split(";")
    if len(rows) != 3:
        raise UsageError("--coframe needs three rows separated by ';'")
    coframe = tuple(_triple(r) for r in rows)
    nu = _triple(args.nu) if args.nu else tuple(ScalarField.constant(0.0) for _ in range(3))
    metric = EUCLIDEAN if args.metric == "euclidean" else LORENTZIAN
    return WeylStructure.create(coframe, nu, metric, Domain(args.box), "explicit")


def _point(p) -> list[float] | None:
    return None if p is None else [float(c) for c in p]


# --------------------------------------------------------------------------
# reports

def _report(command: str, args, checks: list[CheckRecord], extra: dict | None = None,
            wall: dict[str, float] | None = None) -> dict:
    """``meta.wall_time`` holds every timing, so the rest of the report is reproducible."""
    rep = {
        "meta": {"seed": args.seed, "version": __version__, "command": command,
                 "argv": list(args.argv), "wall_time": wall or {}},
        "checks": [c.to_dict() for c in checks],
        "verdict": "pass" if all(c.passed for c in checks) else "fail",
    }
    if extra:
        rep.update(extra)
    return rep


def _fmt(v: float) -> str:
    if v is None:
        return "n/a"
    return f"{v:.3e}"


def _print_table(rep: dict, out=None) -> None:
    out = out or sys.stdout
    width = max([len(c["name"]) for c in rep["checks"]] + [10])
    out.write(f"{'check':<{width}}  {'residual':>10}  {'tol':>8}  result  worst point\n")
    for c in rep["checks"]:
        wp = "" if c["worst_point"] is None else "(" + ", ".join(f"{v:+.4f}" for v in c["worst_point"]) + ")"
        out.write(f"{c['name']:<{width}}  {_fmt(c['residual']):>10}  {c['tol']:>8.0e}  "
                  f"{'PASS' if c['pass'] else 'FAIL':<6}  {wp}\n")
        if c.get("note") and not c["pass"]:
            out.write(f"{'':<{width}}  note: {c['note']}\n")
    out.write(f"verdict: {rep['verdict']}\n")


def _emit(rep: dict, args) -> int:
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rep, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
    _print_table(rep)
    return EXIT_OK if rep["verdict"] == "pass" else EXIT_FAIL


def _tol(args, default: float) -> float:
    return default if args.tol is None else args.tol


# --------------------------------------------------------------------------
# commands

def cmd_check(args) -> int:
    t0 = time.perf_counter()
    spec = _spec(args)
    W = fam.build(spec)
    pts = W.domain.sample(args.points, seed=args.seed)
    conns = [solve_connection(W, p, args.order) for p in pts]
    worst = {k: (0.0, None) for k in ("metric", "connection", "object")}

    def bump(key, value, p):
        if worst[key][1] is None or value > worst[key][0]:
            worst[key] = (float(value), p)

    objects = fam.constant_object(spec)
    for p, c in zip(pts, conns):
        bump("metric", fam.metric_reconstruction_residual(spec, W, p), p)
        bump("connection", max(c.torsion_residual(), c.symmetry_residual()), p)
        for obj in objects:
            bump("object", obj.residual(W, p, c), p)

    expected = spec.subalgebra
    Wc = fam.adapted_structure(spec, W)
    cconns = conns if Wc is W else [solve_connection(Wc, p, args.order) for p in pts]
    vectors = connection_vectors(cconns)
    rep = classify(Wc, pts, conns=cconns)
    got = rep.classified
    per_point = [expected.residual(c.params()) for c in cconns]
    k = int(np.argmax(per_point))
    if got.tag != expected.tag:
        cls_res, note = math.inf, f"classified {got}, expected {expected}"
    elif expected.q is not None and got.q is not None:
        cls_res, note = abs(got.q - expected.q), f"q = {got.q:.9g}"
    else:
        cls_res = expected.residual(vectors)
        note = "q undetermined (p vanishes on the samples)" if got.q is None else ""
    checks = [
        CheckRecord("metric reconstruction", worst["metric"][0], _tol(args, 1e-10), worst["metric"][1]),
        CheckRecord("connection residual", worst["connection"][0], _tol(args, 1e-10), worst["connection"][1]),
        CheckRecord(f"membership in {expected}", per_point[k], _tol(args, MEMBERSHIP_TOL), pts[k]),
        CheckRecord(f"classification {expected}", cls_res, _tol(args, 1e-6), None, note=note),
        CheckRecord("constant object", worst["object"][0], _tol(args, 1e-9), worst["object"][1]),
    ]
    extra = {"family": spec.tag, "classification": rep.to_dict(),
             "constant_objects": [o.description for o in objects]}
    if note:
        extra["classification"]["note"] = note
    out = _report("check", args, checks, extra, {"total": time.perf_counter() - t0})
    print(f"family {spec.tag}: classified {got} ({rep.label}), span dim {rep.span_dim}")
    return _emit(out, args)


def cmd_classify(args) -> int:
    t0 = time.perf_counter()
    if args.coframe:
        if args.family:
            raise UsageError("give either --family or --coframe, not both")
        W = _explicit_structure(args)
    else:
        W = fam.adapted_structure(_spec(args))
    pts = W.domain.sample(args.points, seed=args.seed)
    rep = classify(W, pts, args.order, tol=_tol(args, MEMBERSHIP_TOL))
    k = int(np.argmax(rep.membership_residuals))
    checks = [CheckRecord(f"membership in {rep.classified}", rep.membership_residuals[k],
                          _tol(args, MEMBERSHIP_TOL), pts[k])]
    out = _report("classify", args, checks, {"classification": rep.to_dict()},
                  {"total": time.perf_counter() - t0})
    print(f"classified {rep.classified} ({rep.label}), span dim {rep.span_dim}")
    return _emit(out, args)


def cmd_dkp(args) -> int:
    t0 = time.perf_counter()
    if args.field_K is None:
        raise UsageError("dkp needs --K")
    K = parse_field(args.field_K)
    pts = Domain(args.box).sample(args.points, seed=args.seed)
    chk = dkp.verify_equivalence(K, pts, tol=_tol(args, dkp.DKP_TOL))
    mism = chk.counts["MISMATCH"]
    worst_mismatch = chk.points[chk.point_verdicts.index("MISMATCH")] if mism else None
    checks = [CheckRecord("MISMATCH verdicts", float(mism), 0.0, worst_mismatch)]
    extra = {"dkp": {"verdict": chk.verdict, "counts": chk.counts,
                     "max_residual": chk.max_residual, "max_ew": chk.max_ew,
                     "worst_residual_point": _point(chk.worst("residual")),
                     "worst_ew_point": _point(chk.worst("ew"))}}
    out = _report("dkp", args, checks, extra, {"total": time.perf_counter() - t0})
    counts = ", ".join(f"{k} {v}" for k, v in chk.counts.items())
    print(f"K = {K}: verdict {chk.verdict} ({counts}); max |residual| {chk.max_residual:.3e}, "
          f"max EW {chk.max_ew:.3e}")
    return _emit(out, args)


def cmd_suite(args) -> int:
    seed = DEFAULT_SEED if args.seed is None else args.seed
    args.seed = seed
    only = None
    if args.only:
        only = [b.strip() for b in args.only.split(",") if b.strip()]
        unknown = sorted(set(only) - {name for name, _ in BLOCKS})
        if unknown:
            raise UsageError(f"unknown suite block(s): {', '.join(unknown)}")
    res = run_suite(seed, tol=args.tol, only=only)
    out = _report("suite", args, res.checks, wall=res.timings)
    return _emit(out, args)


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weyl3", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"weyl3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, points=200):
        p.add_argument("--points", type=int, default=points, help="number of sample points")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--box", type=_box, default=(-0.5, 0.5, -0.5, 0.5, -0.5, 0.5),
                       help="xmin,xmax,ymin,ymax,zmin,zmax")
        p.add_argument("--tol", type=float, default=None, help="override every tolerance")
        p.add_argument("--order", type=int, default=2, help="jet order for the connection")
        p.add_argument("--json", metavar="PATH", default=None)

    def family(p):
        p.add_argument("--family", choices=fam.FAMILIES)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--sign", type=_sign, default=-1, help="sign of dz^2 for family E (+ or -)")
        p.add_argument("--cross", type=_sign, default=1, help="sign of the dx dy term for family A-EW")
        for name in FIELD_FLAGS:
            p.add_argument(f"--{name}", dest="field_" + name, metavar="EXPR", default=None)

    p = sub.add_parser("check", help="build a family and verify it")
    family(p)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", help="holonomy classification")
    family(p)
    common(p)
    p.add_argument("--coframe", default=None, help="rows 'a,b,c;d,e,f;g,h,i' of theta^i = E^i_mu dx^mu")
    p.add_argument("--nu", default=None, help="components 'nx,ny,nz' of the potential")
    p.add_argument("--metric", choices=("lorentzian", "euclidean"), default="lorentzian")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("dkp", help="dKP residual against the Einstein-Weyl tensor")
    p.add_argument("--K", dest="field_K", metavar="EXPR", default=None)
    common(p)
    p.set_defaults(func=cmd_dkp)

    p = sub.add_parser("suite", help="run the full verification battery")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json", metavar="PATH", default=None)
    p.add_argument("--only", default=None, metavar="BLOCKS",
                   help="comma-separated subset of: " + ", ".join(name for name, _ in BLOCKS))
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    args.argv = argv
    try:
        return args.func(args)
    except (UsageError, Weyl3Error, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"weyl3: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
