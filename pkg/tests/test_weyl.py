import numpy as np
import pytest

from weyl3 import families as fam
from weyl3.errors import DomainGuardViolated, OrderExceeded, SingularCoframe, ZeroVector
from weyl3.fields import parse_field
from weyl3.weyl import (EUCLIDEAN, LORENTZIAN, Domain, WeylStructure, bianchi_residual, boost,
                        constant_direction_check, coordinate_christoffel, curvature, dnu_frame,
                        gauge_transform, metric_signature_ok, solve_connection,
                        weighted_covariant_derivative)

P = (0.2, -0.1, 0.3)
IDENT = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def generic():
    spec = fam.FamilySpec("A", {"H": "1 + x*z/3 + y^2/4", "K": "x*y - z^2", "L": "y*z + x"})
    return fam.build(spec)


def test_flat_space_has_zero_connection_and_curvature():
    for metric in (LORENTZIAN, EUCLIDEAN):
        W = WeylStructure.create(IDENT, (0, 0, 0), metric)
        conn = solve_connection(W, P)
        assert np.max(np.abs(conn.value())) <= 1e-15
        cd = curvature(W, P)
        assert cd.max_omega() <= 1e-15 and cd.max_ew() <= 1e-15


def test_connection_is_torsion_free_and_weyl():
    W = generic()
    conn = solve_connection(W, P)
    assert conn.torsion_residual() <= 1e-12
    assert conn.symmetry_residual() <= 1e-12
    assert bianchi_residual(curvature(W, P)) <= 1e-10


def test_row_order_does_not_matter():
    W = generic()
    a = solve_connection(W, P).value()
    b = solve_connection(W, P, _row_order=list(range(8, -1, -1))).value()
    assert np.allclose(a, b, atol=1e-13)


def test_gauge_and_boost_leave_the_connection_alone():
    W = generic()
    C0 = coordinate_christoffel(solve_connection(W, P))
    Wg = gauge_transform(W, parse_field("x*y + sin(z)/3"))
    assert np.allclose(coordinate_christoffel(solve_connection(Wg, P)), C0, atol=1e-12)
    Wb = boost(W, parse_field("exp(x - y*z)"))
    assert np.allclose(coordinate_christoffel(solve_connection(Wb, P)), C0, atol=1e-12)
    assert np.allclose(Wb.coordinate_metric(P), W.coordinate_metric(P), atol=1e-14)
    # EW is conformally weighted: the coordinate tensor is gauge invariant
    e0 = curvature(W, P).EW_coord
    assert np.allclose(curvature(Wg, P).EW_coord, e0, atol=1e-10)


def test_boost_needs_null_frame():
    W = WeylStructure.create(IDENT, (0, 0, 0), EUCLIDEAN)
    with pytest.raises(ValueError):
        boost(W, 2.0)


def test_weighted_derivative_of_parallel_vector():
    spec = fam.FamilySpec("B0", {"K": "x^2 + z^3", "L": "y - x*z"})
    W = fam.build(spec)
    D = weighted_covariant_derivative(W, (0, 1, 0), 0.0, P, basis="coordinate")
    assert np.max(np.abs(D)) <= 1e-13
    # the wrong weight picks up m * nu
    D1 = weighted_covariant_derivative(W, (0, 1, 0), 1.0, P, basis="coordinate")
    assert np.max(np.abs(D1)) > 1e-3
    assert constant_direction_check(W, (0, 1, 0), P, basis="coordinate") <= 1e-13


def test_errors():
    W = generic()
    with pytest.raises(ZeroVector):
        constant_direction_check(W, (0, 0, 0), P)
    with pytest.raises(OrderExceeded):
        curvature(W, P, order=2)
    with pytest.raises(OrderExceeded):
        solve_connection(W, P, order=1)
    bad = WeylStructure.create(((1, 0, 0), (1, 0, 0), (0, 0, 1)), (0, 0, 0))
    with pytest.raises(SingularCoframe):
        solve_connection(bad, P)
    with pytest.raises(ValueError):
        WeylStructure.create(((1, 0), (0, 1)), (0, 0, 0))
    with pytest.raises(ValueError):
        weighted_covariant_derivative(W, (1, 0, 0), 0.0, P, basis="polar")


def test_dnu_and_signature():
    W = generic()
    assert metric_signature_ok(W, P)
    dn = dnu_frame(W, P)
    assert np.allclose(dn, -dn.T)
    Wc = WeylStructure.create(IDENT, ("y", 0, 0))
    assert not Wc.nu_closed_at(P)
    assert WeylStructure.create(IDENT, ("x", 0, 0)).nu_closed_at(P)


def test_domain_sampling():
    dom = Domain((0, 1, 0, 1, 0, 1), ((parse_field("x - 0.5"), 0.0),))
    pts = dom.sample(30, seed=3)
    assert len(pts) == 30 and all(dom.contains(p) for p in pts)
    assert pts == dom.sample(30, seed=3)
    impossible = Domain((0, 1, 0, 1, 0, 1), ((parse_field("x - 2"), 0.0),))
    with pytest.raises(DomainGuardViolated):
        impossible.sample(5)
    with pytest.raises(DomainGuardViolated):
        dom.check_guards([(0.1, 0.5, 0.5)])
