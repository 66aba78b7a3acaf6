import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weyl3.errors import CenterMismatch, DivisionByZeroValue, DomainError, OrderExceeded
from weyl3.jets import (Jet, derivatives, extract_partial, jet_arith, jet_constant, jet_func, jet_variable,
                        multi_indices, n_coeffs)

coord = st.floats(-2.0, 2.0, allow_nan=False)
points = st.tuples(coord, coord, coord)


def poly_jet(coeffs, p, order=3):
    """Jet of sum c_m x^i y^j z^l over the degree <= 3 monomials."""
    x, y, z = (jet_variable(a, p, order) for a in "xyz")
    out = jet_constant(0.0, p, order)
    for c, (i, j, l) in zip(coeffs, multi_indices(3)):
        out = out + c * x ** i * y ** j * z ** l
    return out


def poly_partial(coeffs, p, mi):
    """Analytic mixed partial of the same polynomial."""
    total = 0.0
    for c, (i, j, l) in zip(coeffs, multi_indices(3)):
        term = c
        for e, d, v in zip((i, j, l), mi, p):
            if d > e:
                term = 0.0
                break
            term *= math.factorial(e) / math.factorial(e - d) * v ** (e - d)
        total += term
    return total


def test_coefficient_count():
    for k in range(6):
        assert n_coeffs(k) == math.comb(k + 3, 3)
        assert len(multi_indices(k)) == n_coeffs(k)
    assert multi_indices(1) == ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_variable_examples():
    j = jet_variable("x", (2, 0, 0), 2)
    d = derivatives(j)
    assert d[(0, 0, 0)] == 2 and d[(1, 0, 0)] == 1
    assert all(v == 0 for m, v in d.items() if m not in ((0, 0, 0), (1, 0, 0)))
    j = jet_variable("z", (0, 0, 5), 1)
    assert j.value == 5 and extract_partial(j, (0, 0, 1)) == 1
    j = jet_variable("y", (1, 1, 1), 0)
    assert j.value == 1 and j.coeffs.shape == (1,)


def test_product_example():
    p = (2, 3, 0)
    j = jet_arith(jet_variable("x", p, 2), jet_variable("y", p, 2), "mul")
    assert j.value == 6
    assert extract_partial(j, (1, 0, 0)) == 3
    assert extract_partial(j, (0, 1, 0)) == 2
    assert extract_partial(j, (1, 1, 0)) == 1


def test_quotient_identity():
    x = jet_variable("x", (1, 0, 0))
    q = jet_arith(x, x, "div")
    assert np.allclose(q.coeffs, np.eye(1, n_coeffs(3))[0], atol=1e-15)


def test_against_finite_differences():
    p, h = (1.0, 1.0, 0.0), 1e-5
    f = lambda x, y, z: x * x + y
    j = jet_variable("x", p) ** 2 + jet_variable("y", p)
    for axis in range(3):
        e = np.eye(3)[axis] * h
        fd = (f(*(np.add(p, e))) - f(*(np.subtract(p, e)))) / (2 * h)
        mi = tuple(int(a == axis) for a in range(3))
        assert abs(extract_partial(j, mi) - fd) < 1e-8


def test_function_examples():
    p = (0.7, 0.0, 0.0)
    one = jet_func(jet_constant(0.0, p), "exp")
    assert np.allclose(one.coeffs, jet_constant(1.0, p).coeffs)
    x = jet_variable("x", p)
    assert np.allclose(jet_func(jet_func(x, "exp"), "log").coeffs, x.coeffs, atol=1e-14)


def test_partial_examples():
    j = jet_variable("x", (0.3, 0.4, 0)) * jet_variable("y", (0.3, 0.4, 0))
    assert extract_partial(j, (1, 1, 0)) == 1
    z3 = jet_variable("z", (0, 0, 2), 3) ** 3
    assert extract_partial(z3, (0, 0, 2)) == pytest.approx(12)
    with pytest.raises(OrderExceeded):
        extract_partial(z3, (0, 0, 4))


def test_errors():
    x0 = jet_variable("x", (0, 0, 0))
    with pytest.raises(DivisionByZeroValue):
        jet_constant(1.0, (0, 0, 0)) / x0
    with pytest.raises(ZeroDivisionError):
        x0 / 0.0
    with pytest.raises(DomainError):
        x0.log()
    with pytest.raises(DomainError):
        (x0 - 1).sqrt()
    with pytest.raises(CenterMismatch):
        jet_variable("x", (0, 0, 0)) + jet_variable("x", (1, 0, 0))
    with pytest.raises(ValueError):
        jet_func(x0, "tan")
    with pytest.raises(ValueError):
        jet_arith(x0, x0, "pow")


def test_order_and_center_preserved():
    p = (0.1, 0.2, 0.3)
    a, b = jet_variable("x", p), jet_variable("y", p)
    for op in ("add", "sub", "mul", "div"):
        c = jet_arith(a + 2, b + 3, op)
        assert c.order == 3 and c.center == p
    # mixed orders truncate to the lower one
    assert (jet_variable("x", p, 3) * jet_variable("y", p, 1)).order == 1


def test_diff_drops_order():
    p = (0.5, -0.2, 0.1)
    f = jet_variable("x", p) ** 2 * jet_variable("z", p)
    fx = f.diff("x")
    assert fx.order == 2
    assert fx.value == pytest.approx(2 * 0.5 * 0.1)
    assert extract_partial(fx, (0, 0, 1)) == pytest.approx(1.0)


def test_array_valued():
    p = (0.1, 0.2, 0.3)
    x, y = jet_variable("x", p), jet_variable("y", p)
    s = Jet.stack([x, y, x * y])
    assert s.shape == (3,)
    assert np.allclose((s * s)[2].coeffs, (x * y * x * y).coeffs)
    assert np.allclose(s.sum_axis(0).coeffs, (x + y + x * y).coeffs)


def test_immutable():
    j = jet_variable("x", (0, 0, 0))
    with pytest.raises(AttributeError):
        j.order = 2
    with pytest.raises(ValueError):
        j.coeffs[0] = 1.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=20, max_size=20), points)
def test_polynomial_partials_exact(coeffs, p):
    j = poly_jet(coeffs, p)
    for mi in multi_indices(3):
        exact = poly_partial(coeffs, p, mi)
        assert abs(extract_partial(j, mi) - exact) <= 1e-10 * max(1.0, abs(exact))


def random_jet(rng_vals, p):
    return Jet(p, 3, np.asarray(rng_vals))


jet_coeffs = st.lists(st.floats(-1, 1), min_size=20, max_size=20)


@settings(max_examples=60, deadline=None)
@given(jet_coeffs, jet_coeffs, jet_coeffs, points)
def test_ring_axioms(a, b, c, p):
    A, B, C = (random_jet(v, p) for v in (a, b, c))
    assert np.allclose((A * B).coeffs, (B * A).coeffs, atol=1e-12)
    assert np.allclose(((A * B) * C).coeffs, (A * (B * C)).coeffs, atol=1e-12)
    assert np.allclose((A * (B + C)).coeffs, (A * B + A * C).coeffs, atol=1e-12)
    assert np.allclose(((A + B) + C).coeffs, (A + (B + C)).coeffs, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(jet_coeffs, points)
def test_pythagoras(a, p):
    A = random_jet(a, p)
    one = A.sin() * A.sin() + A.cos() * A.cos()
    assert np.allclose(one.coeffs, jet_constant(1.0, p).coeffs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 1.5), st.floats(-1, 1), st.floats(-1, 1))
def test_composition_matches_closed_form(x0, y0, z0):
    # exp(sin(x) * y) and sqrt(x^2 + 1) / (1 + x)
    p = (x0, y0, z0)
    x, y = jet_variable("x", p), jet_variable("y", p)
    f = jet_func(jet_func(x, "sin") * y, "exp")
    g = (x * x + 1).sqrt() / (1 + x)
    s, c = math.sin(x0), math.cos(x0)
    e = math.exp(s * y0)
    # d/dx, d/dy, d2/dxdy of exp(sin(x) y)
    assert extract_partial(f, (1, 0, 0)) == pytest.approx(e * c * y0, rel=1e-10, abs=1e-12)
    assert extract_partial(f, (0, 1, 0)) == pytest.approx(e * s, rel=1e-10, abs=1e-12)
    assert extract_partial(f, (1, 1, 0)) == pytest.approx(e * c * (1 + s * y0), rel=1e-10, abs=1e-12)
    r = math.sqrt(x0 * x0 + 1)
    dg = (x0 / r) / (1 + x0) - r / (1 + x0) ** 2
    assert extract_partial(g, (1, 0, 0)) == pytest.approx(dg, rel=1e-10, abs=1e-12)
