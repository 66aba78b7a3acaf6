"""Independent coordinate-basis cross-check by central finite differences.

Nothing here touches jets, coframes or the torsion solve: the metric and
potential are evaluated as plain floats and differentiated numerically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularMetric
from .fields import ScalarField, as_field

H1 = 1e-5
H2 = 1e-4


@dataclass(frozen=True)
class CoordMetric:
    g: tuple[tuple[ScalarField, ...], ...]
    nu: tuple[ScalarField, ScalarField, ScalarField]

    @classmethod
    def create(cls, g, nu) -> CoordMetric:
        g = tuple(tuple(as_field(c) for c in row) for row in g)
        for i in range(3):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise ValueError("coordinate metric must be symmetric")
        return cls(g, tuple(as_field(c) for c in nu))

    def metric_at(self, p) -> np.ndarray:
        return np.array([[c(*p) for c in row] for row in self.g])

    def nu_at(self, p) -> np.ndarray:
        return np.array([c(*p) for c in self.nu])


def _shift(p, mu, h):
    q = list(p)
    q[mu] += h
    return tuple(q)


def metric_derivative(m: CoordMetric, point, h: float = H1) -> np.ndarray:
    """``dg[rho, mu, nu] = d_rho g_{mu nu}``."""
    return np.stack([(m.metric_at(_shift(point, r, h)) - m.metric_at(_shift(point, r, -h))) / (2 * h)
                     for r in range(3)])


def coord_connection(m: CoordMetric, point, h: float = H1) -> np.ndarray:
    """``C[lam, mu, nu]``: torsion-free connection with ``nabla g = -2 nu (x) g``.

    Levi-Civita part plus ``delta^lam_mu nu_nu + delta^lam_nu nu_mu - g_{mu nu} nu^lam``.
    """
    g = m.metric_at(point)
    if abs(np.linalg.det(g)) < 1e-12:
        raise SingularMetric(f"metric is singular at {tuple(point)}")
    gi = np.linalg.inv(g)
    dg = metric_derivative(m, point, h)
    # first kind: [mu nu, s] = 1/2 (d_mu g_{s nu} + d_nu g_{s mu} - d_s g_{mu nu})
    first = 0.5 * (np.einsum("msn->mns", dg) + np.einsum("nsm->mns", dg) - np.einsum("smn->mns", dg))
    lc = np.einsum("ls,mns->lmn", gi, first)
    nu_low = m.nu_at(point)
    nu_up = gi @ nu_low
    eye = np.eye(3)
    corr = (np.einsum("lm,n->lmn", eye, nu_low) + np.einsum("ln,m->lmn", eye, nu_low)
            - np.einsum("mn,l->lmn", g, nu_up))
    return lc + corr


def compatibility_residual(m: CoordMetric, point, h: float = H1) -> float:
    """max |nabla_rho g_{mu nu} + 2 nu_rho g_{mu nu}|."""
    g = m.metric_at(point)
    dg = metric_derivative(m, point, h)
    C = coord_connection(m, point, h)
    nabla = dg - np.einsum("srm,sn->rmn", C, g) - np.einsum("srn,ms->rmn", C, g)
    return float(np.max(np.abs(nabla + 2 * np.einsum("r,mn->rmn", m.nu_at(point), g))))


def coord_ricci(m: CoordMetric, point, h: float = H2, h_inner: float = H1) -> np.ndarray:
    """``Ric[s, n] = R^r_{s r n}`` with ``R^r_{s m n} = d_m C^r_{n s} - d_n C^r_{m s} + C^r_{m l} C^l_{n s} - C^r_{n l} C^l_{m s}``."""
    C = coord_connection(m, point, h_inner)
    dC = np.stack([(coord_connection(m, _shift(point, r, h), h_inner)
                    - coord_connection(m, _shift(point, r, -h), h_inner)) / (2 * h) for r in range(3)])
    # dC[a, r, m, n] = d_a C^r_{m n}
    Riem = (np.einsum("mrns->rsmn", dC) - np.einsum("nrms->rsmn", dC)
            + np.einsum("rml,lns->rsmn", C, C) - np.einsum("rnl,lms->rsmn", C, C))
    return np.einsum("rsrn->sn", Riem)


def weighted_vector_derivative(m: CoordMetric, V: Sequence, weight: float, point, h: float = H1) -> np.ndarray:
    """``D[mu, lam] = d_mu V^lam + C^lam_{mu nu} V^nu + weight * nu_mu V^lam`` in coordinates."""
    V = [as_field(v) for v in V]
    v = np.array([f(*point) for f in V])
    dv = np.stack([np.array([f(*_shift(point, r, h)) - f(*_shift(point, r, -h)) for f in V]) / (2 * h)
                   for r in range(3)])
    C = coord_connection(m, point, h)
    return dv + np.einsum("lmn,n->ml", C, v) + weight * np.outer(m.nu_at(point), v)
