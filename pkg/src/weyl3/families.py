"""Canonical Weyl structures with reduced holonomy, in adapted coframes.

Family names (also used by the CLI): ``A``, ``B0``, ``Bm2``, ``Bq``, ``C``, ``D``,
``E`` and ``A-EW`` (the type-A structure after imposing three of the four
Einstein-Weyl equations).

Every Lorentzian family uses the null frame metric ``(theta^2)^2 - 2 theta^1 theta^3``.
For ``g = dz^2 + 2H dx dy + K dx^2`` the coframe is ``theta^1 = -(H dy + K/2 dx)``,
``theta^2 = dz``, ``theta^3 = dx``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainGuardViolated, MissingField
from .fields import ScalarField, as_field
from .holonomy import SubalgebraId
from .weyl import EUCLIDEAN, LORENTZIAN, Domain, WeylStructure, ConnectionMatrix, boost, \
    constant_direction_check, weighted_covariant_derivative, weighted_covariant_derivative_covector

FAMILIES = ("A", "B0", "Bm2", "Bq", "C", "D", "E", "A-EW")

REQUIRED = {
    "A": ("H", "K", "L"),
    "B0": ("K", "L"),
    "Bm2": ("H", "K"),
    "Bq": ("K",),
    "C": ("H",),
    "D": ("H",),
    "E": ("K",),
    "A-EW": ("F", "G", "f"),
}

# variables each field may depend on
ALLOWED_VARS = {
    ("B0", "K"): "xz",
    ("D", "H"): "yz",
    ("A-EW", "F"): "xz",
    ("A-EW", "f"): "x",
}

# fields that must stay bounded away from zero on the box
POSITIVE = {"A": "H", "Bm2": "H", "C": "H", "D": "H", "E": "K"}
GUARD = 0.1

ZERO = ScalarField.constant(0.0)
ONE = ScalarField.constant(1.0)


@dataclass(frozen=True)
class FamilySpec:
    tag: str
    fields: Mapping[str, ScalarField] = field(default_factory=dict)
    q: float | None = None
    sign: int = -1
    box: tuple[float, ...] = (-0.5, 0.5, -0.5, 0.5, -0.5, 0.5)
    # A-EW: coefficient of dx dy in g = e^F dz^2 + 2*cross dx dy + G dx^2
    cross: int = 1

    def __post_init__(self):
        object.__setattr__(self, "fields", {k: as_field(v) for k, v in dict(self.fields).items()})

    def field(self, name: str) -> ScalarField:
        try:
            return self.fields[name]
        except KeyError:
            raise MissingField(f"family {self.tag} needs field {name}") from None

    @property
    def subalgebra(self) -> SubalgebraId:
        if self.tag == "A":
            return SubalgebraId("A")
        if self.tag == "B0":
            return SubalgebraId("Bq", 0.0)
        if self.tag == "Bm2":
            return SubalgebraId("Bq", -2.0)
        if self.tag == "Bq":
            return SubalgebraId("Bq", float(self.q))
        if self.tag == "C":
            return SubalgebraId("C")
        if self.tag == "D":
            return SubalgebraId("Dq", 0.0)
        if self.tag == "E":
            return SubalgebraId("E", None, "euclidean" if self.sign > 0 else "lorentzian")
        if self.tag == "A-EW":
            # in the adapted (boosted) coframe; the raw coframe only shows type A
            return SubalgebraId("Bq", -0.5 * self.cross)
        raise KeyError(self.tag)

    @property
    def domain(self) -> Domain:
        guards = ()
        if self.tag in POSITIVE:
            guards = ((self.field(POSITIVE[self.tag]), GUARD),)
        return Domain(tuple(self.box), guards)


def validate(spec: FamilySpec) -> None:
    if spec.tag not in FAMILIES:
        raise ValueError(f"unknown family {spec.tag!r}; expected one of {', '.join(FAMILIES)}")
    for name in REQUIRED[spec.tag]:
        spec.field(name)
    for (tag, name), allowed in ALLOWED_VARS.items():
        if tag == spec.tag:
            extra = spec.field(name).variables - set(allowed)
            if extra:
                raise DomainGuardViolated(f"{name} must depend on {', '.join(allowed)} only; "
                                          f"found {', '.join(sorted(extra))}")
    if spec.tag == "Bq":
        if spec.q is None:
            raise MissingField("family Bq needs q")
        if spec.q in (0.0, -2.0):
            raise DomainGuardViolated("family Bq requires q != 0, -2 (use B0 or Bm2)")
    if spec.tag == "E" and spec.sign not in (1, -1):
        raise DomainGuardViolated("sign must be +1 or -1")
    if spec.tag == "A-EW" and spec.cross not in (1, -1):
        raise DomainGuardViolated("cross term sign must be +1 or -1")
    if spec.tag in POSITIVE:
        f = spec.field(POSITIVE[spec.tag])
        probe = Domain(tuple(spec.box)).sample(64, seed=12345)
        lo, hi = spec.box[0::2], spec.box[1::2]
        corners = [(a, b, c) for a in (lo[0], hi[0]) for b in (lo[1], hi[1]) for c in (lo[2], hi[2])]
        worst = min(f(*p) for p in probe + corners)
        if worst < GUARD:
            raise DomainGuardViolated(f"{POSITIVE[spec.tag]} = {f} drops to {worst:.4g} < {GUARD} on the box")


def _null_coframe(H: ScalarField, K: ScalarField):
    return ((-0.5 * K, -H, ZERO), (ZERO, ZERO, ONE), (ONE, ZERO, ZERO))


def build(spec: FamilySpec) -> WeylStructure:
    validate(spec)
    t = spec.tag
    f = spec.field
    dom = spec.domain
    if t == "A":
        H, K, L = f("H"), f("K"), f("L")
        nu = (L, ZERO, -H.diff("z") / (2 * H))
        return WeylStructure.create(_null_coframe(H, K), nu, LORENTZIAN, dom, "A")
    if t == "B0":
        K, L = f("K"), f("L")
        return WeylStructure.create(_null_coframe(ONE, K), (L, ZERO, ZERO), LORENTZIAN, dom, "B0")
    if t == "Bm2":
        H, K = f("H"), f("K")
        nu = (K.diff("y") / (4 * H) - H.diff("x") / (2 * H), ZERO, -H.diff("z") / (2 * H))
        return WeylStructure.create(_null_coframe(H, K), nu, LORENTZIAN, dom, "Bm2")
    if t == "Bq":
        K = f("K")
        nu = (-K.diff("y") / (2 * spec.q), ZERO, ZERO)
        return WeylStructure.create(_null_coframe(ONE, K), nu, LORENTZIAN, dom, f"Bq(q={spec.q:g})")
    if t in ("C", "D"):
        H = f("H")
        nu = (ZERO, ZERO, -H.diff("z") / (2 * H))
        return WeylStructure.create(_null_coframe(H, ZERO), nu, LORENTZIAN, dom, t)
    if t == "E":
        K = f("K")
        rk = K.sqrt()
        nu = (ZERO, ZERO, -K.diff("z") / (2 * K))
        if spec.sign > 0:
            return WeylStructure.create(((rk, ZERO, ZERO), (ZERO, rk, ZERO), (ZERO, ZERO, ONE)),
                                        nu, EUCLIDEAN, dom, "E+")
        s = 1.0 / math.sqrt(2.0)
        coframe = ((s * rk, ZERO, ScalarField.constant(s)),
                   (ZERO, rk, ZERO),
                   (-s * rk, ZERO, ScalarField.constant(s)))
        return WeylStructure.create(coframe, nu, LORENTZIAN, dom, "E-")
    if t == "A-EW":
        F, G, fx = f("F"), f("G"), f("f")
        t1 = (-0.5 * G, ScalarField.constant(-spec.cross), ZERO)
        coframe = (t1, (ZERO, ZERO, (0.5 * F).exp()), (ONE, ZERO, ZERO))
        nu = (G.diff("y") + fx.diff("x"), ZERO, ZERO)
        return WeylStructure.create(coframe, nu, LORENTZIAN, dom, "A-EW")
    raise ValueError(t)


def coordinate_metric(spec: FamilySpec):
    """Coordinate metric and potential written directly from the family's normal form.

    Returns ``(g, nu)`` with ``g`` a 3x3 nested tuple of fields and ``nu`` a triple.
    This route does not go through the coframe and serves as an independent check.
    """
    validate(spec)
    t = spec.tag
    f = spec.field

    def sym(xx=ZERO, xy=ZERO, yy=ZERO, zz=ZERO):
        return ((xx, xy, ZERO), (xy, yy, ZERO), (ZERO, ZERO, zz))

    if t in ("A", "Bm2"):
        H, K = f("H"), f("K")
        g = sym(xx=K, xy=H, zz=ONE)
        if t == "A":
            nu = (f("L"), ZERO, -H.diff("z") / (2 * H))
        else:
            nu = ((K.diff("y") - 2 * H.diff("x")) / (4 * H), ZERO, -H.diff("z") / (2 * H))
    elif t == "B0":
        g = sym(xx=f("K"), xy=ONE, zz=ONE)
        nu = (f("L"), ZERO, ZERO)
    elif t == "Bq":
        g = sym(xx=f("K"), xy=ONE, zz=ONE)
        nu = (-(1.0 / (2 * spec.q)) * f("K").diff("y"), ZERO, ZERO)
    elif t in ("C", "D"):
        H = f("H")
        g = sym(xy=H, zz=ONE)
        nu = (ZERO, ZERO, -H.diff("z") / (2 * H))
    elif t == "E":
        K = f("K")
        g = sym(xx=K, yy=K, zz=ScalarField.constant(float(spec.sign)))
        nu = (ZERO, ZERO, -K.diff("z") / (2 * K))
    elif t == "A-EW":
        F, G = f("F"), f("G")
        g = sym(xx=G, xy=ScalarField.constant(float(spec.cross)), zz=F.exp())
        nu = (G.diff("y") + f("f").diff("x"), ZERO, ZERO)
    else:
        raise ValueError(t)
    return g, nu


def metric_reconstruction_residual(spec: FamilySpec, W: WeylStructure, point) -> float:
    g, _ = coordinate_metric(spec)
    expected = np.array([[c(*point) for c in row] for row in g])
    return float(np.max(np.abs(W.coordinate_metric(point) - expected)))


# --------------------------------------------------------------------------
# constant objects

@dataclass(frozen=True)
class ConstantObject:
    """A parallel object: ``kind`` is ``vector``, ``covector`` or ``direction``.

    ``components`` are coordinate components (``v^mu d_mu`` or ``w_mu dx^mu``).
    """

    kind: str
    components: tuple[ScalarField, ScalarField, ScalarField]
    weight: float | None
    description: str

    def residual(self, W: WeylStructure, point, conn: ConnectionMatrix | None = None) -> float:
        if self.kind == "direction":
            return constant_direction_check(W, self.components, point, basis="coordinate", conn=conn)
        if self.kind == "vector":
            D = weighted_covariant_derivative(W, self.components, self.weight, point,
                                              basis="coordinate", conn=conn)
        else:
            D = weighted_covariant_derivative_covector(W, self.components, self.weight, point,
                                                       basis="coordinate", conn=conn)
        return float(np.max(np.abs(D)))


def _vec(x=ZERO, y=ZERO, z=ZERO):
    return (as_field(x), as_field(y), as_field(z))


def constant_object(spec: FamilySpec) -> list[ConstantObject]:
    validate(spec)
    t = spec.tag
    dy, dz, dx = _vec(y=ONE), _vec(z=ONE), _vec(x=ONE)
    if t == "A":
        return [ConstantObject("direction", dy, None, "null direction of d_y")]
    if t == "B0":
        return [ConstantObject("vector", dy, 0.0, "null vector d_y (weight 0)")]
    if t == "Bm2":
        H = spec.field("H")
        return [
            ConstantObject("covector", _vec(x=ONE), 0.0, "null 1-form dx"),
            ConstantObject("vector", _vec(y=1 / H), -2.0, "null vector H^-1 d_y = (dx)^# of weight -2"),
            ConstantObject("direction", dy, None, "null direction of d_y"),
        ]
    if t == "Bq":
        return [ConstantObject("vector", dy, float(spec.q), f"null vector d_y of weight {spec.q:g}")]
    if t == "C":
        return [ConstantObject("direction", dz, None, "spatial direction of d_z")]
    if t == "D":
        return [ConstantObject("direction", dz, None, "spatial direction of d_z"),
                ConstantObject("vector", dx, 0.0, "null vector d_x (weight 0)")]
    if t == "E":
        kind = "spatial" if spec.sign > 0 else "timelike"
        return [ConstantObject("direction", dz, None, f"{kind} direction of d_z")]
    if t == "A-EW":
        lam, m = type_a_vector(spec)
        half = "f/2" if spec.cross > 0 else "-f/2"
        return [ConstantObject("vector", _vec(y=lam), m, f"null vector exp({half}) d_y of weight {m:g}")]
    raise ValueError(t)


def type_a_vector(spec: FamilySpec) -> tuple[ScalarField, float]:
    """Coefficient ``lam`` and weight of the parallel null vector ``lam * d_y`` of an A-EW structure.

    With ``+2 dx dy`` this is ``exp(f/2)`` of weight -1/2; flipping the sign of the
    cross term flips both the exponent and the weight.
    """
    if spec.tag != "A-EW":
        raise ValueError("type_a_vector applies to A-EW only")
    fx = spec.field("f")
    if spec.cross > 0:
        return (0.5 * fx).exp(), -0.5
    return (-0.5 * fx).exp(), 0.5


def printed_type_a_vector(spec: FamilySpec) -> ConstantObject:
    """The literal candidate ``exp(3F/4 - f/2) d_y`` of weight -1/2, kept for the audit trail."""
    F, fx = spec.field("F"), spec.field("f")
    return ConstantObject("vector", _vec(y=(0.75 * F - 0.5 * fx).exp()), -0.5,
                          "candidate exp(3F/4 - f/2) d_y of weight -1/2")


def adapted_structure(spec: FamilySpec, W: WeylStructure | None = None) -> WeylStructure:
    """For A-EW, the boosted coframe in which the parallel vector is ``e_1`` direction-wise.

    Other families are returned unchanged.
    """
    W = build(spec) if W is None else W
    if spec.tag != "A-EW":
        return W
    lam, _ = type_a_vector(spec)
    return boost(W, lam)


# --------------------------------------------------------------------------
# random admissible instances

def random_polynomial(rng: np.random.Generator, variables: str = "xyz", degree: int = 3,
                      box: Sequence[float] = (-0.5, 0.5, -0.5, 0.5, -0.5, 0.5),
                      constant_term: bool = True) -> tuple[str, float]:
    """Random polynomial text with coefficients in [-1, 1] and a bound on |p| over ``box``."""
    reach = {v: max(abs(box[2 * i]), abs(box[2 * i + 1])) for i, v in enumerate("xyz")}
    terms, bound = [], 0.0
    for d in range(0 if constant_term else 1, degree + 1):
        for mono in combinations_with_replacement(variables, d):
            c = float(rng.uniform(-1.0, 1.0))
            bound += abs(c) * math.prod(reach[v] for v in mono)
            factors = [f"{c:.6f}"]
            for v in sorted(set(mono)):
                n = mono.count(v)
                factors.append(v if n == 1 else f"{v}^{n}")
            terms.append("*".join(factors))
    if not terms:
        return "0", 0.0
    return " + ".join(terms).replace("+ -", "- "), bound


def _positive(rng, variables, box, base=1.0, amp=0.5) -> str:
    text, bound = random_polynomial(rng, variables, box=box)
    if bound == 0:
        return f"{base}"
    return f"{base} + {amp / bound:.8f}*({text})"


def _generic(rng, variables, box, amp=1.0) -> str:
    text, bound = random_polynomial(rng, variables, box=box)
    if bound == 0:
        return "0"
    return f"{amp / bound:.8f}*({text})"


def random_spec(tag: str, rng: np.random.Generator, q: float | None = None, sign: int = -1,
                box: tuple[float, ...] = (-0.5, 0.5, -0.5, 0.5, -0.5, 0.5), cross: int = 1) -> FamilySpec:
    """A random admissible instance of a family (degree <= 3 polynomial fields)."""
    pos = lambda v="xyz": _positive(rng, v, box)
    gen = lambda v="xyz": _generic(rng, v, box)
    table = {
        "A": lambda: {"H": pos(), "K": gen(), "L": gen()},
        "B0": lambda: {"K": gen("xz"), "L": gen()},
        "Bm2": lambda: {"H": pos(), "K": gen()},
        "Bq": lambda: {"K": gen()},
        "C": lambda: {"H": pos()},
        "D": lambda: {"H": pos("yz")},
        "E": lambda: {"K": pos()},
        "A-EW": lambda: {"F": gen("xz"), "G": gen(), "f": gen("x")},
    }
    if tag not in table:
        raise ValueError(f"unknown family {tag!r}")
    return FamilySpec(tag, table[tag](), q=q, sign=sign, box=box, cross=cross)
