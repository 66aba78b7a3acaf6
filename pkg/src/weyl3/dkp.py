"""The dispersionless KP equation ``(K K_y - 2 K_x)_y = K_zz`` and its link to
Einstein-Weyl structures with a parallel null vector of weight -1/2.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import families as fam
from .fields import ScalarField, as_field
from .holonomy import HolonomyReport, SubalgebraId, classify
from .jets import extract_partial
from .weyl import curvature

DKP_TOL = 1e-9
BAND = 10.0


def _partials(f: ScalarField, point, order: int = 2) -> dict[tuple[int, int, int], float]:
    j = f.jet(point, order)
    out = {}
    for mi in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (0, 2, 0), (0, 0, 2), (0, 1, 1)]:
        out[mi] = float(extract_partial(j, mi))
    return out


def dkp_residual(K, point) -> float:
    """``K_y^2 + K K_yy - 2 K_xy - K_zz`` at ``point``."""
    d = _partials(as_field(K), point)
    return d[0, 1, 0] ** 2 + d[0, 0, 0] * d[0, 2, 0] - 2 * d[1, 1, 0] - d[0, 0, 2]


def type_a_first_residual(H, point) -> float:
    """``H_yz H - H_z H_y``; vanishes exactly when ``H`` splits as ``H1(x, z) H2(x, y)`` locally."""
    d = _partials(as_field(H), point)
    return d[0, 1, 1] * d[0, 0, 0] - d[0, 0, 1] * d[0, 1, 0]


def dkp_spec(K, box=(-0.5, 0.5, -0.5, 0.5, -0.5, 0.5)) -> fam.FamilySpec:
    """The ``Bq`` structure with ``q = -1/2``: ``g = dz^2 + 2 dx dy + K dx^2``, ``nu = K_y dx``."""
    return fam.FamilySpec("Bq", {"K": as_field(K)}, q=-0.5, box=tuple(box))


@dataclass
class DkpCheck:
    K: ScalarField
    points: list[tuple[float, float, float]]
    residuals: list[float]
    ew_norms: list[float]
    tol: float = DKP_TOL
    point_verdicts: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.point_verdicts:
            self.point_verdicts = [_pointwise(r, e, self.tol) for r, e in zip(self.residuals, self.ew_norms)]

    @property
    def verdict(self) -> str:
        if "MISMATCH" in self.point_verdicts:
            return "MISMATCH"
        if all(v == "both-zero" for v in self.point_verdicts):
            return "both-zero"
        return "both-nonzero"

    @property
    def counts(self) -> dict[str, int]:
        c = Counter(self.point_verdicts)
        return {k: c.get(k, 0) for k in ("both-zero", "both-nonzero", "band", "MISMATCH")}

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)

    @property
    def max_ew(self) -> float:
        return max(self.ew_norms, default=0.0)

    def worst(self, which: str = "residual") -> tuple[float, float, float] | None:
        vals = [abs(r) for r in self.residuals] if which == "residual" else self.ew_norms
        if not vals:
            return None
        return self.points[int(np.argmax(vals))]


def _pointwise(r: float, e: float, tol: float) -> str:
    r = abs(r)
    if r <= tol and e <= tol:
        return "both-zero"
    if (r <= tol and e > BAND * tol) or (e <= tol and r > BAND * tol):
        return "MISMATCH"
    if r > tol and e > tol:
        return "both-nonzero"
    # one side inside the guard band: no verdict either way
    return "band"


def verify_equivalence(K, points: Sequence, tol: float = DKP_TOL, order: int = 3) -> DkpCheck:
    K = as_field(K)
    spec = dkp_spec(K)
    W = fam.build(spec)
    pts = [tuple(float(c) for c in p) for p in points]
    residuals, ew = [], []
    for p in pts:
        residuals.append(dkp_residual(K, p))
        ew.append(curvature(W, p, order).max_ew())
    return DkpCheck(K, pts, residuals, ew, tol)


@dataclass
class FlatnessReport:
    tag: SubalgebraId
    points: list[tuple[float, float, float]]
    ew_norms: list[float]
    omega_norms: list[float]
    tol: float

    @property
    def einstein_weyl(self) -> bool:
        return all(e <= self.tol for e in self.ew_norms)

    @property
    def flat(self) -> bool:
        return all(o <= self.tol for o in self.omega_norms)

    @property
    def contradictions(self) -> list[tuple[float, float, float]]:
        """Samples with EW below ``tol`` while the curvature exceeds ``100 tol``."""
        return [p for p, e, o in zip(self.points, self.ew_norms, self.omega_norms)
                if e <= self.tol and o > 100 * self.tol]

    @property
    def status(self) -> str:
        if self.contradictions:
            return "contradiction"
        if self.einstein_weyl:
            return "flat" if self.flat else "einstein-weyl, curved"
        return "not Einstein-Weyl"


_FLAT_TAGS = {"Bq", "B0", "Bm2", "C", "D", "E"}


def flatness_audit(tag: SubalgebraId, spec: fam.FamilySpec, points: Sequence, tol: float = DKP_TOL,
                   order: int = 3) -> FlatnessReport:
    if tag.tag not in ("Bq", "C", "Dq", "E") or (tag.tag == "Bq" and tag.q is not None and abs(tag.q + 0.5) < 1e-12):
        raise ValueError(f"flatness audit covers Bq (q != -1/2), C, D and E; got {tag}")
    W = fam.build(spec)
    pts = [tuple(float(c) for c in p) for p in points]
    ew, om = [], []
    for p in pts:
        cd = curvature(W, p, order)
        ew.append(cd.max_ew())
        om.append(cd.max_omega())
    return FlatnessReport(tag, pts, ew, om, tol)


@dataclass
class TypeAReduction:
    spec: fam.FamilySpec
    vector_residual: float
    weight: float
    report: HolonomyReport

    @property
    def reduced_q(self) -> float | None:
        return self.report.classified.q


def type_a_reduction(spec: fam.FamilySpec, points: Sequence, order: int = 2) -> TypeAReduction:
    """Build an A-EW structure, check its parallel null vector, and reclassify in the adapted coframe."""
    if spec.tag != "A-EW":
        raise ValueError("type_a_reduction needs an A-EW family")
    W = fam.build(spec)
    (obj,) = fam.constant_object(spec)
    pts = [tuple(float(c) for c in p) for p in points]
    res = max(obj.residual(W, p) for p in pts)
    report = classify(fam.adapted_structure(spec, W), pts, order)
    return TypeAReduction(spec, res, obj.weight, report)
