"""The verification battery behind ``weyl3 suite``.

Each check produces a :class:`CheckRecord`; a check passes iff its residual is at most
its tolerance. Random data is drawn from generators keyed on ``(seed, block)`` so every
block is reproducible on its own.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import dkp
from . import families as fam
from . import forms, oracle
from .fields import ScalarField
from .holonomy import MEMBERSHIP_TOL, classify
from .weyl import LORENTZIAN, Domain, WeylStructure, curvature, dnu_frame, gauge_transform, solve_connection

DEFAULT_SEED = 0
BOX = (-0.5, 0.5, -0.5, 0.5, -0.5, 0.5)

# rows of the reduced-holonomy battery: (label, family tag, q, sign)
TABLE_ROWS = (
    ("A", "A", None, -1),
    ("B0", "B0", None, -1),
    ("Bm2", "Bm2", None, -1),
    ("Bq(0.7)", "Bq", 0.7, -1),
    ("Bq(-1)", "Bq", -1.0, -1),
    ("Bq(-3)", "Bq", -3.0, -1),
    ("C", "C", None, -1),
    ("D", "D", None, -1),
    ("E-", "E", None, -1),
    ("E+", "E", None, 1),
)

DKP_EXACT = "x*y + (x^2-2)/2 * z^2"


@dataclass
class CheckRecord:
    name: str
    residual: float
    tol: float
    worst_point: tuple[float, float, float] | None = None
    criterion: int | None = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def to_dict(self) -> dict:
        wp = None if self.worst_point is None else [float(c) for c in self.worst_point]
        r = float(self.residual)
        # strict JSON has no infinity; a missing residual reads as "could not be evaluated"
        return {"name": self.name, "residual": r if math.isfinite(r) else None, "tol": float(self.tol),
                "pass": self.passed, "worst_point": wp, "criterion": self.criterion,
                **({"note": self.note} if self.note else {})}


@dataclass
class SuiteResult:
    checks: list[CheckRecord] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_criterion(self) -> dict[int, list[CheckRecord]]:
        out: dict[int, list[CheckRecord]] = {}
        for c in self.checks:
            out.setdefault(c.criterion, []).append(c)
        return out


class _Worst:
    """Running maximum of a residual together with where it happened."""

    def __init__(self):
        self.value = 0.0
        self.point = None

    def update(self, value: float, point) -> None:
        value = float(value)
        if math.isnan(value):
            value = math.inf
        if self.point is None or value > self.value:
            self.value, self.point = value, tuple(point)


def _rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng([seed, block])


def _tol(tol: float, override: float | None) -> float:
    return tol if override is None else override


# --------------------------------------------------------------------------
# 1. flat model

def flat_model() -> WeylStructure:
    """Null coordinates with the frame metric itself: ``theta^i = dx^i``, ``nu = 0``."""
    one, zero = ScalarField.constant(1.0), ScalarField.constant(0.0)
    coframe = ((one, zero, zero), (zero, one, zero), (zero, zero, one))
    return WeylStructure.create(coframe, (zero, zero, zero), LORENTZIAN, Domain(BOX), "flat")


def check_flat(seed: int, n: int = 100, tol: float | None = None) -> list[CheckRecord]:
    W = flat_model()
    g_w, o_w, e_w = _Worst(), _Worst(), _Worst()
    for p in W.domain.sample(n, seed=seed):
        cd = curvature(W, p)
        g_w.update(np.max(np.abs(cd.connection.value())), p)
        o_w.update(cd.max_omega(), p)
        e_w.update(cd.max_ew(), p)
    t = _tol(1e-12, tol)
    return [CheckRecord("flat: connection", g_w.value, t, g_w.point, 1),
            CheckRecord("flat: curvature", o_w.value, t, o_w.point, 1),
            CheckRecord("flat: EW", e_w.value, t, e_w.point, 1)]


# --------------------------------------------------------------------------
# 2. reduced-holonomy battery

def check_table(seed: int, instances: int = 10, points: int = 8, tol: float | None = None,
                rows: Sequence = TABLE_ROWS) -> list[CheckRecord]:
    out = []
    for r, (label, tag, q, sign) in enumerate(rows):
        rng = _rng(seed, 100 + r)
        conn_w, metric_w, member_w, obj_w, cls_w = _Worst(), _Worst(), _Worst(), _Worst(), _Worst()
        notes = []
        for i in range(instances):
            spec = fam.random_spec(tag, rng, q=q, sign=sign, box=BOX)
            W = fam.build(spec)
            pts = W.domain.sample(points, seed=int(rng.integers(2**31)))
            conns = [solve_connection(W, p, 2) for p in pts]
            for p, c in zip(pts, conns):
                conn_w.update(max(c.torsion_residual(), c.symmetry_residual()), p)
                metric_w.update(fam.metric_reconstruction_residual(spec, W, p), p)
                for obj in fam.constant_object(spec):
                    obj_w.update(obj.residual(W, p, c), p)
            expected = spec.subalgebra
            member = expected.residual(np.concatenate([c.params() for c in conns]))
            member_w.update(member, pts[0])
            rep = classify(W, pts, conns=conns)
            got = rep.classified
            if got.tag != expected.tag:
                cls_w.update(math.inf, pts[0])
                notes.append(f"instance {i}: {got} != {expected}")
            elif expected.q is not None:
                cls_w.update(abs((got.q if got.q is not None else math.inf) - expected.q), pts[0])
            else:
                cls_w.update(0.0, pts[0])
        out += [
            CheckRecord(f"table {label}: connection", conn_w.value, _tol(1e-10, tol), conn_w.point, 2),
            CheckRecord(f"table {label}: metric", metric_w.value, _tol(1e-10, tol), metric_w.point, 2),
            CheckRecord(f"table {label}: membership", member_w.value, _tol(MEMBERSHIP_TOL, tol), member_w.point, 2),
            CheckRecord(f"table {label}: classification", cls_w.value, _tol(1e-6, tol), cls_w.point, 2,
                        "; ".join(notes)),
            CheckRecord(f"table {label}: constant object", obj_w.value, _tol(1e-9, tol), obj_w.point, 2),
        ]
    return out


# --------------------------------------------------------------------------
# 3. dKP equivalence

def random_dkp_potential(rng: np.random.Generator) -> str:
    text, bound = fam.random_polynomial(rng, "xyz", box=BOX)
    return "0" if bound == 0 else f"{1.0 / bound:.8f}*({text})"


def check_dkp(seed: int, n: int = 200, random_k: int = 50, random_points: int = 100,
              tol: float | None = None) -> list[CheckRecord]:
    dom = Domain(BOX)
    pts = dom.sample(n, seed=seed)
    exact = dkp.verify_equivalence(DKP_EXACT, pts)
    out = [CheckRecord("dkp: exact potential residual", exact.max_residual, _tol(1e-10, tol),
                       exact.worst("residual"), 3),
           CheckRecord("dkp: exact potential EW", exact.max_ew, _tol(1e-9, tol), exact.worst("ew"), 3)]
    # K = y^2: the residual equals 6 y^2 on the box; on the slice y = 1 it is 6 and EW must not vanish
    sq = dkp.verify_equivalence("y^2", pts)
    dev = _Worst()
    for p, r in zip(sq.points, sq.residuals):
        dev.update(abs(r - 6 * p[1] ** 2), p)
    out.append(CheckRecord("dkp: y^2 residual = 6y^2", dev.value, _tol(1e-10, tol), dev.point, 3))
    slice_pts = [(x, 1.0, z) for x, _, z in pts[:20]]
    on_slice = dkp.verify_equivalence("y^2", slice_pts)
    six = _Worst()
    for p, r in zip(on_slice.points, on_slice.residuals):
        six.update(abs(r - 6.0), p)
    out.append(CheckRecord("dkp: y^2 residual = 6 at y = 1", six.value, _tol(1e-12, tol), six.point, 3))
    k = int(np.argmin(on_slice.ew_norms))
    out.append(CheckRecord("dkp: y^2 EW > 1e-3 at y = 1", max(1e-3 - on_slice.ew_norms[k], 0.0), 0.0,
                           on_slice.points[k], 3, f"smallest EW norm {on_slice.ew_norms[k]:.6g}"))
    out.append(CheckRecord("dkp: y^2 verdict", 0.0 if sq.verdict == "both-nonzero" else 1.0, 0.0,
                           None, 3, sq.verdict))
    rng = _rng(seed, 300)
    mismatches, worst = 0, None
    for i in range(random_k):
        K = random_dkp_potential(rng)
        chk = dkp.verify_equivalence(K, dom.sample(random_points, seed=int(rng.integers(2**31))))
        if chk.verdict == "MISMATCH":
            mismatches += 1
            worst = chk.points[chk.point_verdicts.index("MISMATCH")]
    out.append(CheckRecord(f"dkp: MISMATCH verdicts over {random_k} potentials", float(mismatches), 0.0,
                           worst, 3))
    return out


# --------------------------------------------------------------------------
# 4. type-A reduction

def check_type_a(seed: int, instances: int = 10, points: int = 10, tol: float | None = None) -> list[CheckRecord]:
    """Both the literal candidate vector and the verified one, in both cross-term conventions."""
    rng = _rng(seed, 400)
    literal = {1: _Worst(), -1: _Worst()}
    fixed, cls_w = _Worst(), _Worst()
    notes = []
    for i in range(instances):
        base = fam.random_spec("A-EW", rng, box=BOX, cross=-1)
        pts = base.domain.sample(points, seed=int(rng.integers(2**31)))
        for cross in (-1, 1):
            spec = fam.FamilySpec("A-EW", base.fields, cross=cross, box=BOX)
            W = fam.build(spec)
            cand = fam.printed_type_a_vector(spec)
            for p in pts:
                literal[cross].update(cand.residual(W, p), p)
        spec = fam.FamilySpec("A-EW", base.fields, cross=1, box=BOX)
        red = dkp.type_a_reduction(spec, pts)
        fixed.update(red.vector_residual, pts[0])
        got = red.report.classified
        if got.tag != "Bq" or got.q is None:
            cls_w.update(math.inf, pts[0])
            notes.append(f"instance {i}: {got}")
        else:
            cls_w.update(abs(got.q + 0.5), pts[0])
    t = _tol(1e-9, tol)
    return [
        CheckRecord("type-A: exp(3F/4 - f/2) d_y, weight -1/2, -2dxdy", literal[-1].value, t, literal[-1].point, 4),
        CheckRecord("type-A: exp(3F/4 - f/2) d_y, weight -1/2, +2dxdy", literal[1].value, t, literal[1].point, 4),
        CheckRecord("type-A: exp(f/2) d_y, weight -1/2, +2dxdy", fixed.value, t, fixed.point, 4),
        CheckRecord("type-A: adapted classification Bq(-1/2)", cls_w.value, _tol(1e-6, tol), cls_w.point, 4,
                    "; ".join(notes)),
    ]


# --------------------------------------------------------------------------
# 5. coordinate oracle

ORACLE_ROWS = (("A", None, -1), ("B0", None, -1), ("Bm2", None, -1), ("Bq", 0.7, -1), ("C", None, -1),
               ("D", None, -1), ("E", None, -1), ("E", None, 1), ("A-EW", None, -1))


def check_oracle(seed: int, instances: int = 10, points: int = 2, tol: float | None = None) -> list[CheckRecord]:
    out = []
    for r, (tag, q, sign) in enumerate(ORACLE_ROWS):
        rng = _rng(seed, 500 + r)
        w = _Worst()
        for _ in range(instances):
            spec = fam.random_spec(tag, rng, q=q, sign=sign, box=BOX)
            W = fam.build(spec)
            M = oracle.CoordMetric.create(*fam.coordinate_metric(spec))
            for p in W.domain.sample(points, seed=int(rng.integers(2**31))):
                ric = curvature(W, p).Ricci_coord
                w.update(np.max(np.abs(ric - oracle.coord_ricci(M, p))), p)
        label = tag + ("+" if tag == "E" and sign > 0 else "-" if tag == "E" else "")
        out.append(CheckRecord(f"oracle {label}: Ricci", w.value, _tol(1e-5, tol), w.point, 5))
    return out


# --------------------------------------------------------------------------
# 6. gauge invariance

def check_gauge(seed: int, transforms: int = 10, points: int = 3, tol: float | None = None) -> list[CheckRecord]:
    out = []
    for r, (tag, q, sign) in enumerate(ORACLE_ROWS):
        rng = _rng(seed, 600 + r)
        spec = fam.random_spec(tag, rng, q=q, sign=sign, box=BOX)
        W = fam.build(spec)
        pts = W.domain.sample(points, seed=int(rng.integers(2**31)))
        base = [curvature(W, p).EW_coord for p in pts]
        scale = max(max(float(np.max(np.abs(b))) for b in base), 1e-12)
        w = _Worst()
        for _ in range(transforms):
            phi = fam._generic(rng, "xyz", BOX)
            W2 = gauge_transform(W, phi)
            for p, b in zip(pts, base):
                w.update(np.max(np.abs(curvature(W2, p).EW_coord - b)) / scale, p)
        label = tag + ("+" if tag == "E" and sign > 0 else "-" if tag == "E" else "")
        out.append(CheckRecord(f"gauge {label}: EW relative change", w.value, _tol(1e-8, tol), w.point, 6))
    return out


# --------------------------------------------------------------------------
# 7. skew-symmetric Ricci against d(nu)

SKEW_ROWS = (("A", None), ("B0", None), ("Bm2", None), ("Bq", 0.7), ("A-EW", None))


def skew_ratios(W: WeylStructure, point, floor: float = 1e-3) -> np.ndarray:
    """``Ric_[ij] / (d nu)_ij`` over frame components where ``|d nu_ij| > floor``."""
    R = curvature(W, point).Ricci
    skew = 0.5 * (R - R.T)
    dn = dnu_frame(W, point)
    iu = np.triu_indices(3, 1)
    mask = np.abs(dn[iu]) > floor
    return skew[iu][mask] / dn[iu][mask]


def check_skew(seed: int, structures: int = 20, points: int = 2, tol: float | None = None) -> list[CheckRecord]:
    rng = _rng(seed, 700)
    ratios, where = [], []
    used = 0
    while used < structures:
        tag, q = SKEW_ROWS[used % len(SKEW_ROWS)]
        spec = fam.random_spec(tag, rng, q=q, box=BOX)
        W = gauge_transform(fam.build(spec), fam._generic(rng, "xyz", BOX, amp=0.5))
        pts = W.domain.sample(points, seed=int(rng.integers(2**31)))
        if all(W.nu_closed_at(p) for p in pts):
            continue
        used += 1
        for p in pts:
            rs = skew_ratios(W, p)
            ratios.extend(rs.tolist())
            where.extend([p] * len(rs))
    if not ratios:
        return [CheckRecord("skew Ricci: ratio spread", math.inf, _tol(1e-8, tol), None, 7, "no usable samples")]
    first = ratios[0]
    dev = np.abs(np.asarray(ratios) - first)
    k = int(np.argmax(dev))
    return [CheckRecord("skew Ricci: ratio spread", float(dev[k]), _tol(1e-8, tol), where[k], 7,
                        f"ratio {first:.12g}")]


# --------------------------------------------------------------------------
# 8. exterior calculus

def _random_form(rng: np.random.Generator, degree: int, point, order: int = 3) -> forms.Form:
    comps = []
    for _ in forms.BASIS[degree]:
        text, bound = fam.random_polynomial(rng, "xyz", box=BOX)
        f = ScalarField.parse(text) if bound else ScalarField.constant(0.0)
        comps.append(f.jet(point, order))
    return forms.Form.from_components(degree, comps)


def check_forms(seed: int, n: int = 100, tol: float | None = None) -> list[CheckRecord]:
    rng = _rng(seed, 800)
    dd, leib = _Worst(), _Worst()
    for _ in range(n):
        p = tuple(float(v) for v in rng.uniform(-0.5, 0.5, 3))
        k = int(rng.integers(0, 3))
        l = int(rng.integers(0, 3))
        a, b = _random_form(rng, k, p), _random_form(rng, l, p)
        dd.update(forms.d(forms.d(a)).max_abs(), p)
        lhs = forms.d(forms.wedge(a, b))
        rhs = forms.wedge(forms.d(a), b) + forms.wedge(a, forms.d(b)) * (-1) ** k
        leib.update((lhs - rhs).max_abs(), p)
    t = _tol(1e-10, tol)
    return [CheckRecord("forms: d(d a) = 0", dd.value, t, dd.point, 8),
            CheckRecord("forms: Leibniz rule", leib.value, t, leib.point, 8)]


# --------------------------------------------------------------------------

BLOCKS: tuple[tuple[str, Callable[..., list[CheckRecord]]], ...] = (
    ("flat", check_flat),
    ("table", check_table),
    ("dkp", check_dkp),
    ("type_a", check_type_a),
    ("oracle", check_oracle),
    ("gauge", check_gauge),
    ("skew", check_skew),
    ("forms", check_forms),
)


def run_suite(seed: int = DEFAULT_SEED, tol: float | None = None,
              only: Iterable[str] | None = None) -> SuiteResult:
    result = SuiteResult()
    wanted = set(only) if only is not None else None
    for name, fn in BLOCKS:
        if wanted is not None and name not in wanted:
            continue
        t0 = time.perf_counter()
        result.checks += fn(seed, tol=tol)
        result.timings[name] = time.perf_counter() - t0
    result.timings["total"] = sum(result.timings.values())
    return result
