import numpy as np
import pytest

from weyl3 import families as fam
from weyl3.errors import SingularMetric
from weyl3.oracle import (CoordMetric, compatibility_residual, coord_connection, coord_ricci,
                          weighted_vector_derivative)
from weyl3.weyl import coordinate_christoffel, curvature, solve_connection

P = (0.1, 0.2, -0.15)
FLAT = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def oracle_for(spec):
    g, nu = fam.coordinate_metric(spec)
    return CoordMetric.create(g, nu)


def test_flat():
    m = CoordMetric.create(FLAT, (0, 0, 0))
    assert np.max(np.abs(coord_connection(m, P))) <= 1e-12
    assert np.max(np.abs(coord_ricci(m, P))) <= 1e-8


def test_compatibility():
    m = CoordMetric.create((("1 + x^2", "y", 0), ("y", "2 + z", 0), (0, 0, "exp(x)")), ("y", "x*z", "1"))
    assert compatibility_residual(m, P) <= 1e-8


def test_errors():
    with pytest.raises(SingularMetric):
        coord_connection(CoordMetric.create(((1, 0, 0), (0, 0, 0), (0, 0, 1)), (0, 0, 0)), P)
    with pytest.raises(ValueError):
        CoordMetric.create(((1, "x", 0), (0, 1, 0), (0, 0, 1)), (0, 0, 0))


@pytest.mark.parametrize("tag, kw", [("A", {}), ("Bm2", {}), ("Bq", {"q": 0.7}), ("E", {"sign": 1}),
                                     ("A-EW", {})])
def test_agrees_with_frame_pipeline(tag, kw):
    spec = fam.random_spec(tag, np.random.default_rng(1), **kw)
    W, m = fam.build(spec), oracle_for(spec)
    for p in spec.domain.sample(2, seed=4):
        C = coordinate_christoffel(solve_connection(W, p))
        assert np.allclose(coord_connection(m, p), C, atol=1e-7)
        ric = coord_ricci(m, p)
        assert np.allclose(ric, curvature(W, p).Ricci_coord, atol=1e-5)


def test_weighted_vector_derivative():
    spec = fam.random_spec("B0", np.random.default_rng(0))
    m = oracle_for(spec)
    D = weighted_vector_derivative(m, (0, 1, 0), 0.0, P)
    assert np.max(np.abs(D)) <= 1e-8
