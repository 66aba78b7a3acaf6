"""Weyl structures in an adapted coframe: connection, curvature, weighted derivatives.

Index conventions used throughout:

* ``E[i, mu]``: coframe components, ``theta^i = E[i, mu] dx^mu``.
* ``Einv[mu, k]``: dual frame, ``e_k = Einv[mu, k] d_mu``.
* ``Gamma[i, j, k]``: frame components ``Gamma^i_j = Gamma[i, j, k] theta^k``, so that
  ``nabla_{e_k} e_j = Gamma[i, j, k] e_i`` and ``d theta^i + Gamma^i_j ^ theta^j = 0``.
* ``Omega[i, j, k, l]``: ``Omega^i_j = 1/2 Omega[i, j, k, l] theta^k ^ theta^l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from . import forms
from .errors import (DomainGuardViolated, LinearSolveSingular, OrderExceeded,
                     ZeroVector)
from .fields import ScalarField, as_field
from .forms import BASIS, Form
from .jets import DEFAULT_ORDER, Jet

Point = tuple[float, float, float]


# --------------------------------------------------------------------------
# frame metric

@dataclass(frozen=True)
class FrameMetric:
    signature: str
    g: np.ndarray = field(repr=False)
    g_inv: np.ndarray = field(repr=False)

    @classmethod
    def lorentzian(cls) -> FrameMetric:
        # g = (theta^2)^2 - 2 theta^1 theta^3
        g = np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
        return cls("lorentzian", g, np.linalg.inv(g))

    @classmethod
    def euclidean(cls) -> FrameMetric:
        return cls("euclidean", np.eye(3), np.eye(3))

    def __eq__(self, other):
        return isinstance(other, FrameMetric) and self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)


LORENTZIAN = FrameMetric.lorentzian()
EUCLIDEAN = FrameMetric.euclidean()


# --------------------------------------------------------------------------
# domain

@dataclass(frozen=True)
class Domain:
    """Sampling box plus lower-bound guards ``field(p) >= bound``."""

    box: tuple[float, float, float, float, float, float] = (-0.5, 0.5, -0.5, 0.5, -0.5, 0.5)
    guards: tuple[tuple[ScalarField, float], ...] = ()

    def contains(self, point: Sequence[float]) -> bool:
        lo, hi = self.lows, self.highs
        if any(p < a or p > b for p, a, b in zip(point, lo, hi)):
            return False
        return all(f(*point) >= bound for f, bound in self.guards)

    @property
    def lows(self):
        return self.box[0::2]

    @property
    def highs(self):
        return self.box[1::2]

    def sample(self, n: int, seed: int = 0, max_tries: int = 20) -> list[Point]:
        """``n`` scrambled-Halton points inside the box that satisfy every guard."""
        sampler = qmc.Halton(d=3, scramble=True, seed=seed)
        out: list[Point] = []
        for _ in range(max_tries):
            raw = qmc.scale(sampler.random(max(n, 16)), self.lows, self.highs)
            for p in raw:
                pt = tuple(float(v) for v in p)
                if all(f(*pt) >= bound for f, bound in self.guards):
                    out.append(pt)
                    if len(out) == n:
                        return out
        raise DomainGuardViolated(f"only {len(out)} of {n} sample points satisfy the domain guards")

    def check_guards(self, points: Sequence[Sequence[float]]) -> None:
        for pt in points:
            for f, bound in self.guards:
                v = f(*pt)
                if v < bound:
                    raise DomainGuardViolated(f"guard {f} >= {bound} fails at {tuple(pt)} (value {v:.4g})")


# --------------------------------------------------------------------------
# Weyl structure

@dataclass(frozen=True)
class WeylStructure:
    coframe: tuple[tuple[ScalarField, ScalarField, ScalarField], ...]
    metric: FrameMetric
    nu: tuple[ScalarField, ScalarField, ScalarField]
    domain: Domain = Domain()
    name: str = ""

    @classmethod
    def create(cls, coframe, nu, metric: FrameMetric = LORENTZIAN, domain: Domain | None = None,
               name: str = "") -> WeylStructure:
        cf = tuple(tuple(as_field(c) for c in row) for row in coframe)
        if len(cf) != 3 or any(len(r) != 3 for r in cf):
            raise ValueError("coframe must be a 3x3 array of components")
        nu = tuple(as_field(c) for c in nu)
        if len(nu) != 3:
            raise ValueError("nu needs three components")
        return cls(cf, metric, nu, domain or Domain(), name)

    def coframe_jets(self, point, order=DEFAULT_ORDER) -> Jet:
        return Jet.stack([Jet.stack([f.jet(point, order) for f in row]) for row in self.coframe])

    def nu_jets(self, point, order=DEFAULT_ORDER) -> Jet:
        return Jet.stack([f.jet(point, order) for f in self.nu])

    def coordinate_metric(self, point) -> np.ndarray:
        """``g_{mu nu} = g_ij E^i_mu E^j_nu`` at ``point``."""
        E = np.array([[f(*point) for f in row] for row in self.coframe])
        return E.T @ self.metric.g @ E

    def nu_closed_at(self, point, tol=1e-9) -> bool:
        dnu = forms.d(Form(1, self.nu_jets(point, 2)))
        return dnu.max_abs() <= tol


def metric_signature_ok(W: WeylStructure, point) -> bool:
    eig = np.linalg.eigvalsh(W.coordinate_metric(point))
    neg = int(np.sum(eig < 0))
    return neg == (1 if W.metric.signature == "lorentzian" else 0) and np.all(np.abs(eig) > 1e-12)


# --------------------------------------------------------------------------
# local evaluation

@dataclass(frozen=True)
class _Local:
    point: Point
    order: int
    E: Jet
    Einv: Jet
    nu: Jet          # coordinate components
    nu_frame: Jet    # nu = nu_frame[k] theta^k

    def theta(self, i) -> Form:
        return Form(1, self.E[i])


def _local(W: WeylStructure, point, order) -> _Local:
    point = tuple(float(p) for p in point)
    E = W.coframe_jets(point, order)
    Einv = forms.inverse3(E)
    nu = W.nu_jets(point, order)
    nu_frame = (Einv * nu[:, None]).sum_axis(0)
    return _Local(point, order, E, Einv, nu, nu_frame)


# --------------------------------------------------------------------------
# connection

_PAIRS = BASIS[2]  # (0,1), (0,2), (1,2)


@lru_cache(maxsize=None)
def _torsion_system(signature: str) -> np.ndarray:
    """9x9 matrix mapping antisymmetric lowered unknowns to torsion frame components.

    Unknowns u[(m,l), k] = Gt_{m l k} for m < l; rows (i, (k,l)) hold
    g^{im} (Gt_{m l k} - Gt_{m k l}).
    """
    g_inv = (LORENTZIAN if signature == "lorentzian" else EUCLIDEAN).g_inv
    A = np.zeros((9, 9))

    def gt(m, l, k):
        # coefficient vector of Gt_{m l k} in the unknowns
        v = np.zeros(9)
        if m == l:
            return v
        if m < l:
            v[_PAIRS.index((m, l)) * 3 + k] = 1.0
        else:
            v[_PAIRS.index((l, m)) * 3 + k] = -1.0
        return v

    for i in range(3):
        for r, (k, l) in enumerate(_PAIRS):
            row = np.zeros(9)
            for m in range(3):
                row += g_inv[i, m] * (gt(m, l, k) - gt(m, k, l))
            A[i * 3 + r] = row
    return A


def _unknowns_to_lowered(u: np.ndarray) -> np.ndarray:
    """(9, n) unknowns -> (3, 3, 3, n) antisymmetric Gt[m, l, k]."""
    n = u.shape[-1]
    G = np.zeros((3, 3, 3, n))
    for p, (m, l) in enumerate(_PAIRS):
        for k in range(3):
            G[m, l, k] = u[p * 3 + k]
            G[l, m, k] = -u[p * 3 + k]
    return G


@dataclass(frozen=True)
class ConnectionMatrix:
    """Solved Weyl connection at one point."""

    point: Point
    Gamma: Jet            # [i, j, k] frame components
    Gamma_coord: Jet      # [i, j, mu] coordinate components of the 1-forms Gamma^i_j
    metric: FrameMetric
    local: _Local = field(repr=False)

    @property
    def order(self) -> int:
        return self.Gamma.order

    def value(self) -> np.ndarray:
        """``Gamma[i, j, k]`` values."""
        return np.asarray(self.Gamma.value)

    def params(self) -> np.ndarray:
        """``[k, (p, a, b, c)]``: co-algebra parameters of ``Gamma(e_k)`` per frame direction."""
        from .holonomy import co_decompose
        vals = self.value()
        return np.array([co_decompose(vals[:, :, k], self.metric) for k in range(3)])

    def matrix(self, k: int) -> np.ndarray:
        """``Gamma(e_k)`` as a 3x3 matrix."""
        return self.value()[:, :, k]

    def one_form(self, i: int, j: int) -> Form:
        return Form(1, self.Gamma_coord[i, j])

    def torsion_residual(self) -> float:
        """max |d theta^i + Gamma^i_j ^ theta^j|, evaluated in coordinates."""
        L = self.local
        worst = 0.0
        for i in range(3):
            total = forms.d(L.theta(i))
            for j in range(3):
                total = total + forms.wedge(self.one_form(i, j), L.theta(j))
            worst = max(worst, total.max_abs())
        return worst

    def symmetry_residual(self) -> float:
        """max |Gamma_(ij) - g_ij nu| over frame components."""
        G = self.value()
        low = np.einsum("im,mjk->ijk", self.metric.g, G)
        sym = 0.5 * (low + low.transpose(1, 0, 2))
        nu = np.asarray(self.local.nu_frame.value)
        return float(np.max(np.abs(sym - self.metric.g[:, :, None] * nu[None, None, :])))


def solve_connection(W: WeylStructure, point, order: int = DEFAULT_ORDER,
                     _row_order: Sequence[int] | None = None) -> ConnectionMatrix:
    """Unique torsion-free connection with ``Gamma_(ij) = g_ij nu`` at ``point``."""
    if order < 2:
        raise OrderExceeded("solve_connection needs jet order >= 2")
    L = _local(W, point, order)
    return _solve(W, L, _row_order)


def _solve(W: WeylStructure, L: _Local, row_order=None) -> ConnectionMatrix:
    g, g_inv = W.metric.g, W.metric.g_inv
    # frame components of d theta^i + nu ^ theta^i
    nu_form = Form(1, L.nu)
    rhs = []
    for i in range(3):
        t = L.theta(i)
        two = forms.d(t) + forms.wedge(nu_form, t)
        comps = forms.frame_components_from_inverse(two, L.Einv)
        for k, l in _PAIRS:
            rhs.append(-comps[k, l].coeffs)
    order = L.order - 1
    B = np.stack(rhs)
    A = _torsion_system(W.metric.signature)
    if row_order is not None:
        A, B = A[list(row_order)], B[list(row_order)]
    if np.linalg.cond(A) > 1e12:
        raise LinearSolveSingular("torsion system is singular")
    try:
        u = np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise LinearSolveSingular(str(exc)) from None
    Gt_low = _unknowns_to_lowered(u)
    Gt = np.einsum("im,mjkn->ijkn", g_inv, Gt_low)
    nu_f = L.nu_frame.truncate(order).coeffs
    Gamma_c = Gt + np.eye(3)[:, :, None, None] * nu_f[None, None, :, :]
    Gamma = Jet(L.point, order, Gamma_c)
    # Gamma^i_j as coordinate 1-forms: Gamma[i,j,k] E[k,mu]
    E = L.E.truncate(order)
    Gamma_coord = (Gamma[:, :, :, None] * E[None, None, :, :]).sum_axis(2)
    return ConnectionMatrix(L.point, Gamma, Gamma_coord, W.metric, L)


# --------------------------------------------------------------------------
# curvature

@dataclass(frozen=True)
class CurvatureData:
    point: Point
    Omega: Jet               # [i, j, mu, nu] coordinate components of Omega^i_j
    Omega_frame: np.ndarray  # [i, j, k, l]
    Ricci: np.ndarray        # Ric_ij = Omega^k_{ikj}
    R: float
    EW: np.ndarray           # symmetric trace-free Ricci, frame
    EW_coord: np.ndarray
    Ricci_coord: np.ndarray
    connection: ConnectionMatrix = field(repr=False)

    def max_omega(self) -> float:
        return float(np.max(np.abs(self.Omega_frame)))

    def max_ew(self) -> float:
        return float(np.max(np.abs(self.EW)))


def curvature(W: WeylStructure, point, order: int = DEFAULT_ORDER) -> CurvatureData:
    if order < 3:
        raise OrderExceeded("curvature needs jet order >= 3")
    conn = solve_connection(W, point, order)
    return curvature_from_connection(W, conn)


def curvature_from_connection(W: WeylStructure, conn: ConnectionMatrix) -> CurvatureData:
    G = conn.Gamma_coord                       # [i, j, mu], order k-1
    if G.order < 1:
        raise OrderExceeded("connection jets carry no derivative budget for curvature")
    dG = Jet.stack([G.diff(mu) for mu in range(3)], axis=-1)   # [i, j, nu, mu] = d_mu G[i,j,nu]
    dGc = dG.coeffs
    d_part = np.swapaxes(dGc, 2, 3) - dGc      # [i,j,mu,nu] = d_mu G_nu - d_nu G_mu
    Gt = G.truncate(G.order - 1)
    # (Gamma ^ Gamma)^i_j _{mu nu} = sum_k G[i,k,mu] G[k,j,nu] - G[i,k,nu] G[k,j,mu]
    prod = (Gt[:, :, None, :, None] * Gt[None, :, :, None, :]).sum_axis(1)   # [i, j, mu, nu]
    pc = prod.coeffs
    ww = pc - np.swapaxes(pc, 2, 3)
    Omega = Jet(conn.point, G.order - 1, d_part + ww)
    Einv = np.asarray(conn.local.Einv.value)
    E = np.asarray(conn.local.E.value)
    Om = np.asarray(Omega.value)
    Omega_frame = np.einsum("ijmn,mk,nl->ijkl", Om, Einv, Einv)
    Ric = np.einsum("kikj->ij", Omega_frame)
    g, g_inv = W.metric.g, W.metric.g_inv
    R = float(np.einsum("ij,ij->", Ric, g_inv))
    EW = 0.5 * (Ric + Ric.T) - R / 3.0 * g
    return CurvatureData(conn.point, Omega, Omega_frame, Ric, R, EW,
                         E.T @ EW @ E, E.T @ Ric @ E, conn)


def bianchi_residual(data: CurvatureData) -> float:
    """max |Omega^i_j ^ theta^j| (first Bianchi identity of a torsion-free connection)."""
    L = data.connection.local
    order = data.Omega.order
    worst = 0.0
    for i in range(3):
        total = None
        for j in range(3):
            om = forms.from_coordinate_matrix(data.Omega[i, j])
            w = forms.wedge(om, Form(1, L.E[j].truncate(order)))
            total = w if total is None else total + w
        worst = max(worst, total.max_abs())
    return worst


def dnu_frame(W: WeylStructure, point, order: int = 2) -> np.ndarray:
    """Frame components of d(nu)."""
    L = _local(W, point, order)
    return np.asarray(forms.frame_components_from_inverse(forms.d(Form(1, L.nu)), L.Einv).value)


def coordinate_christoffel(conn: ConnectionMatrix) -> np.ndarray:
    """``C[lam, mu, nu]`` with ``nabla_{d_mu} d_nu = C[lam, mu, nu] d_lam``."""
    L = conn.local
    E = np.asarray(L.E.value)
    Einv = np.asarray(L.Einv.value)
    dE = np.stack([np.asarray(L.E.diff(mu).value) for mu in range(3)])   # [mu, i, nu]
    Gc = np.asarray(conn.Gamma_coord.value)                              # [i, j, mu]
    inner = np.transpose(dE, (1, 0, 2)) + np.einsum("jn,ijm->imn", E, Gc)  # [i, mu, nu]
    return np.einsum("li,imn->lmn", Einv, inner)


# --------------------------------------------------------------------------
# gauge and frame changes

def gauge_transform(W: WeylStructure, phi) -> WeylStructure:
    """``theta -> e^phi theta`` (so ``g -> e^{2 phi} g``) and ``nu -> nu - d phi``."""
    phi = as_field(phi)
    if phi.is_zero:
        return W
    ephi = phi.exp()
    coframe = tuple(tuple(ephi * c if not c.is_zero else c for c in row) for row in W.coframe)
    nu = tuple(n - phi.diff(v) for n, v in zip(W.nu, "xyz"))
    return replace(W, coframe=coframe, nu=nu)


def boost(W: WeylStructure, lam) -> WeylStructure:
    """Null boost ``theta^1 -> theta^1 / lam``, ``theta^3 -> lam theta^3``; the metric is unchanged."""
    if W.metric.signature != "lorentzian":
        raise ValueError("null boosts need the Lorentzian null frame")
    lam = as_field(lam)
    t1, t2, t3 = W.coframe
    return replace(W, coframe=(tuple(c / lam if not c.is_zero else c for c in t1), t2,
                               tuple(lam * c if not c.is_zero else c for c in t3)))


# --------------------------------------------------------------------------
# weighted derivatives and constant objects

def _frame_vector(L: _Local, V, basis: str) -> Jet:
    comps = Jet.stack([as_field(v).jet(L.point, L.order) for v in V])
    if basis == "frame":
        return comps
    if basis == "coordinate":
        # V^i = E^i_mu v^mu
        return (L.E * comps[None, :]).sum_axis(1)
    raise ValueError(f"unknown basis {basis!r}")


def _frame_covector(L: _Local, w, basis: str) -> Jet:
    comps = Jet.stack([as_field(v).jet(L.point, L.order) for v in w])
    if basis == "frame":
        return comps
    if basis == "coordinate":
        # w_i = Einv^mu_i w_mu
        return (L.Einv * comps[:, None]).sum_axis(0)
    raise ValueError(f"unknown basis {basis!r}")


def _frame_gradient(L: _Local, f: Jet) -> np.ndarray:
    """``[k, ...] = e_k(f)`` values for a jet array ``f``."""
    grads = np.stack([np.asarray(f.diff(mu).value) for mu in range(3)])   # [mu, ...]
    Einv = np.asarray(L.Einv.value)
    return np.tensordot(Einv.T, grads, axes=1)                            # [k, ...]


def weighted_covariant_derivative(W: WeylStructure, V, m: float, point, order: int = DEFAULT_ORDER,
                                  basis: str = "frame", conn: ConnectionMatrix | None = None) -> np.ndarray:
    """``D[k, i] = e_k(V^i) + Gamma^i_{jk} V^j + m nu_k V^i``."""
    conn = conn or solve_connection(W, point, order)
    L = conn.local
    Vj = _frame_vector(L, V, basis)
    v = np.asarray(Vj.value)
    G = conn.value()
    nu = np.asarray(L.nu_frame.value)
    return _frame_gradient(L, Vj) + np.einsum("ijk,j->ki", G, v) + m * np.outer(nu, v)


def weighted_covariant_derivative_covector(W: WeylStructure, w, m: float, point, order: int = DEFAULT_ORDER,
                                           basis: str = "frame",
                                           conn: ConnectionMatrix | None = None) -> np.ndarray:
    """``D[k, i] = e_k(w_i) - Gamma^j_{ik} w_j + m nu_k w_i``."""
    conn = conn or solve_connection(W, point, order)
    L = conn.local
    wj = _frame_covector(L, w, basis)
    v = np.asarray(wj.value)
    G = conn.value()
    nu = np.asarray(L.nu_frame.value)
    return _frame_gradient(L, wj) - np.einsum("jik,j->ki", G, v) + m * np.outer(nu, v)


def constant_direction_check(W: WeylStructure, V, point, order: int = DEFAULT_ORDER, basis: str = "frame",
                             conn: ConnectionMatrix | None = None) -> float:
    """max_k |(nabla_k V) ^ V| / |V|^2; zero iff the direction of V is parallel."""
    conn = conn or solve_connection(W, point, order)
    v = np.asarray(_frame_vector(conn.local, V, basis).value)
    norm2 = float(v @ v)
    if norm2 < 1e-24:
        raise ZeroVector(f"vector vanishes at {conn.point}")
    D = weighted_covariant_derivative(W, V, 0.0, point, basis=basis, conn=conn)
    worst = 0.0
    for k in range(3):
        biv = np.outer(D[k], v) - np.outer(v, D[k])
        worst = max(worst, float(np.max(np.abs(biv))) / norm2)
    return worst
