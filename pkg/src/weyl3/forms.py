"""Pointwise exterior calculus on R^3 with jet-valued coordinate components.

Components are stored in the coordinate basis, ordered as

* degree 0: ``[1]``
* degree 1: ``[dx, dy, dz]``
* degree 2: ``[dx^dy, dx^dz, dy^dz]``
* degree 3: ``[dx^dy^dz]``

Forms of degree above 3 are allowed and always zero (they have no components).

Differentiation consumes one order of the component jets, so a form carries
its own remaining derivative budget in ``order``.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import CenterMismatch, OrderExceeded, SingularCoframe
from .jets import Jet

# degrees up to 7 so that wedges and derivatives of top forms stay closed
BASIS = {k: tuple(combinations(range(3), k)) for k in range(8)}


def _sort_sign(idx):
    """Sign of the permutation sorting ``idx``; 0 when an index repeats."""
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


@lru_cache(maxsize=None)
def _wedge_table(k: int, l: int):
    out = []
    pos = {b: n for n, b in enumerate(BASIS[k + l])}
    for a, ia in enumerate(BASIS[k]):
        for b, ib in enumerate(BASIS[l]):
            sign, merged = _sort_sign(ia + ib)
            if sign:
                out.append((a, b, pos[merged], sign))
    return tuple(out)


@lru_cache(maxsize=None)
def _d_table(k: int):
    out = []
    pos = {b: n for n, b in enumerate(BASIS[k + 1])}
    for a, ia in enumerate(BASIS[k]):
        for mu in range(3):
            sign, merged = _sort_sign((mu,) + ia)
            if sign:
                out.append((a, mu, pos[merged], sign))
    return tuple(out)


class Form:
    """A differential form at one point; degrees above 3 carry no components."""

    __slots__ = ("degree", "comps")

    def __init__(self, degree: int, comps: Jet):
        if not 0 <= degree < len(BASIS):
            raise ValueError(f"degree must be in 0..{len(BASIS) - 1}, got {degree}")
        if comps.shape != (len(BASIS[degree]),):
            raise ValueError(f"degree-{degree} form needs {len(BASIS[degree])} components, "
                             f"got shape {comps.shape}")
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "comps", comps)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    @classmethod
    def from_components(cls, degree: int, comps: Sequence[Jet]) -> Form:
        return cls(degree, Jet.stack(comps))

    @classmethod
    def zero(cls, degree: int, center, order: int) -> Form:
        return cls(degree, Jet.constant(np.zeros(len(BASIS[degree])), center, order))

    @property
    def center(self):
        return self.comps.center

    @property
    def order(self) -> int:
        return self.comps.order

    def __getitem__(self, n) -> Jet:
        return self.comps[n]

    def __add__(self, other: Form) -> Form:
        self._check(other)
        return Form(self.degree, self.comps + other.comps)

    def __sub__(self, other: Form) -> Form:
        self._check(other)
        return Form(self.degree, self.comps - other.comps)

    def __neg__(self):
        return Form(self.degree, -self.comps)

    def scale(self, f) -> Form:
        """Multiply by a 0-form given as a scalar jet or number."""
        if isinstance(f, Form):
            f = f.comps[0]
        return Form(self.degree, self.comps * f)

    def __mul__(self, f):
        return self.scale(f)

    __rmul__ = __mul__

    def _check(self, other):
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        if other.center != self.center:
            raise CenterMismatch(f"{self.center} != {other.center}")

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.comps.value))) if self.comps.shape[0] else 0.0

    def __repr__(self):
        return f"Form(degree={self.degree}, value={self.comps.value})"


def zero_form(f: Jet) -> Form:
    return Form(0, Jet.stack([f]))


def one_form(wx: Jet, wy: Jet, wz: Jet) -> Form:
    return Form.from_components(1, [wx, wy, wz])


def wedge(a: Form, b: Form) -> Form:
    if a.center != b.center:
        raise CenterMismatch(f"{a.center} != {b.center}")
    deg = a.degree + b.degree
    order = min(a.order, b.order)
    table = _wedge_table(a.degree, b.degree)
    n_out = len(BASIS[deg])
    # products of all component pairs, then signed scatter
    ca = a.comps.truncate(order)
    cb = b.comps.truncate(order)
    ia = [t[0] for t in table]
    ib = [t[1] for t in table]
    out = np.zeros((n_out, ca.coeffs.shape[-1]))
    if table:
        prods = ca[ia] * cb[ib]
        for n, (_, _, t, sign) in enumerate(table):
            out[t] += sign * prods.coeffs[n]
    return Form(deg, Jet(a.center, order, out))


def exterior_derivative(a: Form) -> Form:
    if a.order < 1:
        raise OrderExceeded("exterior derivative needs component jets of order >= 1")
    grads = [a.comps.diff(mu) for mu in range(3)]
    out = np.zeros((len(BASIS[a.degree + 1]), grads[0].coeffs.shape[-1]))
    for comp, mu, t, sign in _d_table(a.degree):
        out[t] += sign * grads[mu].coeffs[comp]
    return Form(a.degree + 1, Jet(a.center, a.order - 1, out))


d = exterior_derivative


def coordinate_matrix(a: Form) -> Jet:
    """Antisymmetric 3x3 jet array ``A`` with ``a = 1/2 A_{mu nu} dx^mu ^ dx^nu``."""
    if a.degree != 2:
        raise ValueError("coordinate_matrix expects a 2-form")
    c = a.comps.coeffs
    n = c.shape[-1]
    A = np.zeros((3, 3, n))
    for k, (mu, nu) in enumerate(BASIS[2]):
        A[mu, nu] = c[k]
        A[nu, mu] = -c[k]
    return Jet(a.center, a.order, A)


def from_coordinate_matrix(A: Jet) -> Form:
    return Form(2, Jet.stack([A[mu, nu] for mu, nu in BASIS[2]]))


def coframe_matrix(coframe: Sequence[Form]) -> Jet:
    """Jet array ``E[i, mu]`` with ``theta^i = E[i, mu] dx^mu``."""
    return Jet.stack([t.comps for t in coframe])


def inverse3(E: Jet) -> Jet:
    """Inverse of a 3x3 jet matrix via cofactors."""
    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != i]
            c = [k for k in range(3) if k != j]
            minor = E[r[0], c[0]] * E[r[1], c[1]] - E[r[0], c[1]] * E[r[1], c[0]]
            cof[i][j] = minor if (i + j) % 2 == 0 else -minor
    det = E[0, 0] * cof[0][0] + E[0, 1] * cof[0][1] + E[0, 2] * cof[0][2]
    if abs(det.value) < 1e-12 * (1.0 + E.scale ** 3):
        raise SingularCoframe(f"coframe determinant {det.value:.3e} vanishes at {E.center}")
    adj = Jet.stack([Jet.stack([cof[j][i] for j in range(3)]) for i in range(3)])
    return adj * det.reciprocal()


def frame_components(a: Form, coframe: Sequence[Form] | Jet) -> Jet:
    """Antisymmetric ``a_kl`` with ``a = 1/2 a_kl theta^k ^ theta^l``."""
    E = coframe if isinstance(coframe, Jet) else coframe_matrix(coframe)
    Einv = inverse3(E)
    return frame_components_from_inverse(a, Einv)


def frame_components_from_inverse(a: Form, Einv: Jet) -> Jet:
    """Same as :func:`frame_components` given ``Einv[mu, k]`` (dual frame e_k = Einv[mu, k] d_mu)."""
    A = coordinate_matrix(a)
    # a_kl = A_{mu nu} Einv^mu_k Einv^nu_l
    return matmul(matmul(transpose(Einv), A), Einv)


def matmul(A: Jet, B: Jet) -> Jet:
    """Matrix product of jet matrices (last two leading axes)."""
    return (A[:, :, None] * B[None, :, :]).sum_axis(1)


def transpose(A: Jet) -> Jet:
    return Jet(A.center, A.order, np.swapaxes(A.coeffs, 0, 1))
