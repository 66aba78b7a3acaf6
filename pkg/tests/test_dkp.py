import numpy as np
import pytest

from weyl3 import dkp
from weyl3 import families as fam
from weyl3.holonomy import SubalgebraId
from weyl3.weyl import Domain

PTS = Domain().sample(20, seed=2)


EXACT = "x*y + (x^2-2)/2 * z^2"


@pytest.mark.parametrize("K", ["0", "x", EXACT, "sin(x) + x^2*z", "exp(x) - 3*z"])
def test_residual_examples(K):
    # exact solutions of the dKP equation
    for p in PTS[:5]:
        assert abs(dkp.dkp_residual(K, p)) <= 1e-12


def test_y_squared():
    for p in PTS:
        assert dkp.dkp_residual("y^2", p) == pytest.approx(6 * p[1] ** 2, abs=1e-12)


def test_equivalence_verdicts():
    assert dkp.verify_equivalence(EXACT, PTS).verdict == "both-zero"
    slice_pts = [(p[0], 1.0, p[2]) for p in PTS]
    check = dkp.verify_equivalence("y^2", slice_pts)
    assert check.verdict == "both-nonzero"
    assert min(check.ew_norms) > 1e-3
    assert check.counts["both-nonzero"] == len(slice_pts)
    assert check.worst() in slice_pts


def test_ew_is_half_the_residual():
    K = "x*y^2 + z^3/3 - x*z"
    check = dkp.verify_equivalence(K, PTS)
    for r, e in zip(check.residuals, check.ew_norms):
        assert e == pytest.approx(0.5 * abs(r), rel=1e-9, abs=1e-12)


def test_adding_a_function_of_x_keeps_residual():
    # K_yy = 0, so shifting K by c(x) only touches K_xy through c, which has no y
    for p in PTS[:5]:
        a = dkp.dkp_residual("x*y + z^3", p)
        b = dkp.dkp_residual("x*y + z^3 + sin(x) + x^3", p)
        assert a == pytest.approx(b, abs=1e-12)


def test_pointwise_band():
    assert dkp._pointwise(0.0, 0.0, 1e-9) == "both-zero"
    assert dkp._pointwise(1.0, 0.0, 1e-9) == "MISMATCH"
    assert dkp._pointwise(5e-9, 0.0, 1e-9) == "band"
    assert dkp._pointwise(1.0, 1.0, 1e-9) == "both-nonzero"


def test_flatness_audit():
    spec = fam.FamilySpec("C", {"H": "1"})
    rep = dkp.flatness_audit(SubalgebraId("C"), spec, PTS[:5])
    assert rep.flat and rep.status == "flat"
    flat_sq = fam.FamilySpec("C", {"H": "1 + x^2"})
    assert dkp.flatness_audit(SubalgebraId("C"), flat_sq, PTS[:5]).flat
    curved = fam.FamilySpec("C", {"H": "1 + x^2 + y*z"})
    rep = dkp.flatness_audit(SubalgebraId("C"), curved, PTS[:5])
    assert rep.status == "not Einstein-Weyl" and not rep.contradictions
    e = fam.FamilySpec("E", {"K": "1"}, sign=1)
    assert dkp.flatness_audit(SubalgebraId("E", signature="euclidean"), e, PTS[:5]).flat
    with pytest.raises(ValueError):
        dkp.flatness_audit(SubalgebraId("Bq", -0.5), dkp.dkp_spec("x"), PTS[:2])
    with pytest.raises(ValueError):
        dkp.flatness_audit(SubalgebraId("A"), spec, PTS[:2])


def test_type_a_first_residual():
    for p in PTS[:5]:
        assert abs(dkp.type_a_first_residual("(1 + x*z^2)*(2 + x*y)", p)) <= 1e-12
    assert abs(dkp.type_a_first_residual("1 + y*z", (0.1, 0.2, 0.3))) > 1e-3


def test_type_a_reduction():
    spec = fam.random_spec("A-EW", np.random.default_rng(3))
    red = dkp.type_a_reduction(spec, spec.domain.sample(6))
    assert red.vector_residual <= 1e-9
    assert red.weight == -0.5
    assert red.report.classified.tag == "Bq"
    assert red.reduced_q == pytest.approx(-0.5, abs=1e-8)
    with pytest.raises(ValueError):
        dkp.type_a_reduction(dkp.dkp_spec("x"), PTS[:2])
