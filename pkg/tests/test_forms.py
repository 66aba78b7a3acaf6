import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weyl3.errors import CenterMismatch, OrderExceeded
from weyl3.fields import parse_field
from weyl3.forms import BASIS, Form, coframe_matrix, d, frame_components, one_form, wedge, zero_form
from weyl3.jets import extract_partial, jet_constant, jet_variable


def field_form(degree, exprs, p, order=3):
    return Form.from_components(degree, [parse_field(e).jet(p, order) for e in exprs])


def test_wedge_examples():
    p = (2.0, 3.0, 0.0)
    dx = field_form(1, ["1", "0", "0"], p)
    dy = field_form(1, ["0", "1", "0"], p)
    dxdy = wedge(dx, dy)
    assert dxdy.degree == 2
    assert np.allclose(dxdy.comps.value, [1, 0, 0])
    assert wedge(dx, dx).max_abs() == 0
    # (x dy) ^ (y dz) = xy dy^dz
    a = field_form(1, ["0", "x", "0"], p)
    b = field_form(1, ["0", "0", "y"], p)
    assert np.allclose(wedge(a, b).comps.value, [0, 0, 6])


def test_exterior_derivative_examples():
    p = (2.0, 3.0, 0.0)
    df = d(field_form(0, ["x*y"], p))
    assert np.allclose(df.comps.value, [3, 2, 0])
    assert np.allclose(d(field_form(1, ["0", "x", "0"], p)).comps.value, [1, 0, 0])
    # degree 3 -> zero 4-form
    vol = field_form(3, ["x*y*z"], p)
    assert d(vol).degree == 4 and d(vol).max_abs() == 0.0


def test_degree_overflow_is_zero():
    p = (0.1, 0.2, 0.3)
    a = field_form(2, ["x", "y", "z"], p)
    out = wedge(a, a)
    assert out.degree == 4 and len(BASIS[4]) == 0


def test_errors():
    p = (0.0, 0.0, 0.0)
    a = field_form(1, ["x", "0", "0"], p)
    b = field_form(1, ["x", "0", "0"], (1.0, 0.0, 0.0))
    with pytest.raises(CenterMismatch):
        wedge(a, b)
    with pytest.raises(OrderExceeded):
        d(field_form(1, ["x", "0", "0"], p, order=0))
    with pytest.raises(ValueError):
        Form(2, jet_constant(np.zeros(2), p))
    with pytest.raises(ValueError):
        a + field_form(2, ["0", "0", "0"], p)


def test_frame_components():
    p = (0.3, -0.2, 0.1)
    # theta^1 = 2 dx, theta^2 = dy, theta^3 = dz + x dy
    cf = [field_form(1, r, p) for r in (["2", "0", "0"], ["0", "1", "0"], ["0", "x", "1"])]
    a = wedge(cf[0], cf[2]).scale(3.0)
    comps = np.asarray(frame_components(a, cf).value)
    expected = np.zeros((3, 3))
    expected[0, 2], expected[2, 0] = 3.0, -3.0
    assert np.allclose(comps, expected, atol=1e-14)
    assert coframe_matrix(cf).shape == (3, 3)


def test_d_drops_order_and_keeps_center():
    p = (0.5, 0.5, 0.5)
    f = zero_form(jet_variable("x", p) * jet_variable("y", p))
    df = d(f)
    assert df.order == 2 and df.center == p
    assert extract_partial(df[1], (1, 0, 0)) == pytest.approx(1.0)


# ---------------------------------------------------------------- properties

coef = st.floats(-1, 1, allow_nan=False)


def random_form(degree, coeffs, p):
    """Form whose components are quadratic polynomials in the coordinates."""
    x, y, z = (jet_variable(v, p) for v in "xyz")
    monos = [1, x, y, z, x * y, y * z, x * z, x * x, z * z]
    comps = []
    for n in range(len(BASIS[degree])):
        c = coeffs[n * len(monos):(n + 1) * len(monos)]
        comps.append(sum((ci * m for ci, m in zip(c, monos[1:])), jet_constant(c[0], p) * monos[0]))
    return Form.from_components(degree, comps)


forms_args = st.tuples(st.lists(coef, min_size=27, max_size=27), st.tuples(coef, coef, coef))


@settings(max_examples=40, deadline=None)
@given(forms_args, forms_args, st.integers(0, 2), st.integers(0, 1))
def test_d_squared_and_leibniz(fa, fb, k, l):
    (ca, p), (cb, _) = fa, fb
    a, b = random_form(k, ca, p), random_form(l, cb, p)
    assert d(d(a)).max_abs() <= 1e-10
    lhs = d(wedge(a, b))
    rhs = wedge(d(a), b) + wedge(a, d(b)).scale((-1.0) ** k)
    assert (lhs - rhs).max_abs() <= 1e-10


@settings(max_examples=40, deadline=None)
@given(forms_args, forms_args, forms_args, st.integers(0, 1), st.integers(0, 1))
def test_wedge_associative_and_graded(fa, fb, fc, k, l):
    p = fa[1]
    a, b, c = random_form(k, fa[0], p), random_form(l, fb[0], p), random_form(1, fc[0], p)
    assert (wedge(wedge(a, b), c) - wedge(a, wedge(b, c))).max_abs() <= 1e-12
    assert (wedge(a, b) - wedge(b, a).scale((-1.0) ** (k * l))).max_abs() <= 1e-12
