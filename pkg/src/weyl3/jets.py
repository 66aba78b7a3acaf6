"""Truncated Taylor expansions in three variables.

A :class:`Jet` stores the Taylor coefficients ``c[i,j,l] = d^(i+j+l) f / (dx^i dy^j dz^l) / (i! j! l!)``
of a function at a fixed center, for every multi-index of total degree at most ``order``.
Coefficients live on the last axis of ``coeffs``; any leading axes make the jet
array-valued (a 3x3 matrix of jets is a ``Jet`` with ``shape == (3, 3)``).
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CenterMismatch, DivisionByZeroValue, DomainError, OrderExceeded

DEFAULT_ORDER = 3
DIV_EPS = 1e-12
AXES = {"x": 0, "y": 1, "z": 2}


@lru_cache(maxsize=None)
def multi_indices(order: int) -> tuple[tuple[int, int, int], ...]:
    """Graded lexicographic list of (i, j, l) with i + j + l <= order."""
    out = []
    for d in range(order + 1):
        for i in range(d, -1, -1):
            for j in range(d - i, -1, -1):
                out.append((i, j, d - i - j))
    return tuple(out)


@lru_cache(maxsize=None)
def _index(order: int) -> dict[tuple[int, int, int], int]:
    return {m: n for n, m in enumerate(multi_indices(order))}


def n_coeffs(order: int) -> int:
    return math.comb(order + 3, 3)


@lru_cache(maxsize=None)
def _product_matrix(order: int) -> np.ndarray:
    """(n*n, n) matrix P with (a outer b).ravel() @ P == truncated product."""
    idx = multi_indices(order)
    lookup = _index(order)
    n = len(idx)
    P = np.zeros((n * n, n))
    for p, (i1, j1, l1) in enumerate(idx):
        for q, (i2, j2, l2) in enumerate(idx):
            t = lookup.get((i1 + i2, j1 + j2, l1 + l2))
            if t is not None:
                P[p * n + q, t] = 1.0
    P.flags.writeable = False
    return P


@lru_cache(maxsize=None)
def _derivative_matrix(order: int, axis: int) -> np.ndarray:
    """(n_k, n_{k-1}) matrix mapping coefficients to those of the partial along ``axis``."""
    src = _index(order)
    dst = multi_indices(order - 1)
    D = np.zeros((len(src), len(dst)))
    for t, m in enumerate(dst):
        up = list(m)
        up[axis] += 1
        D[src[tuple(up)], t] = up[axis]
    D.flags.writeable = False
    return D


@lru_cache(maxsize=None)
def _truncation_slice(order: int) -> int:
    # graded ordering: the lower-order block is a prefix
    return n_coeffs(order)


@lru_cache(maxsize=None)
def _factorials(order: int) -> np.ndarray:
    return np.array([math.factorial(i) * math.factorial(j) * math.factorial(l)
                     for i, j, l in multi_indices(order)], dtype=float)


class Jet:
    """Immutable truncated Taylor expansion (possibly array-valued)."""

    __slots__ = ("center", "order", "coeffs")
    __array_priority__ = 100

    def __init__(self, center: Sequence[float], order: int, coeffs):
        if order < 0:
            raise OrderExceeded(f"jet order must be >= 0, got {order}")
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1:] != (n_coeffs(order),):
            raise ValueError(f"expected {n_coeffs(order)} coefficients on the last axis, "
                             f"got shape {coeffs.shape}")
        coeffs.flags.writeable = False
        object.__setattr__(self, "center", tuple(float(c) for c in center))
        object.__setattr__(self, "order", int(order))
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    # construction -----------------------------------------------------

    @classmethod
    def constant(cls, value, center, order) -> Jet:
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (n_coeffs(order),))
        c[..., 0] = value
        return cls(center, order, c)

    @classmethod
    def stack(cls, jets: Sequence[Jet], axis: int = 0) -> Jet:
        jets = list(jets)
        order = min(j.order for j in jets)
        center = _common_center(jets)
        arrs = [j.truncate(order).coeffs for j in jets]
        if axis < 0:
            axis -= 1
        return cls(center, order, np.stack(arrs, axis=axis))

    # basic views -------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def __getitem__(self, key) -> Jet:
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.center, self.order, self.coeffs[key + (Ellipsis,)])

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self):
        return f"Jet(center={self.center}, order={self.order}, shape={self.shape}, value={self.value!r})"

    def sum_axis(self, axis: int) -> Jet:
        if axis < 0:
            axis -= 1
        return Jet(self.center, self.order, self.coeffs.sum(axis=axis))

    def truncate(self, order: int) -> Jet:
        if order == self.order:
            return self
        if order > self.order:
            raise OrderExceeded(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.center, order, self.coeffs[..., :_truncation_slice(order)])

    def partial(self, multi_index: Sequence[int]):
        """Mixed partial derivative ``d^(i+j+l) f / dx^i dy^j dz^l`` at the center."""
        return extract_partial(self, multi_index)

    def diff(self, axis) -> Jet:
        """Jet of the partial derivative along ``axis``; order drops by one."""
        if isinstance(axis, str):
            axis = AXES[axis]
        if self.order < 1:
            raise OrderExceeded("cannot differentiate an order-0 jet")
        return Jet(self.center, self.order - 1, self.coeffs @ _derivative_matrix(self.order, axis))

    # arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.center != self.center:
                raise CenterMismatch(f"{self.center} != {other.center}")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        other = np.asarray(other, dtype=float)
        return self, Jet.constant(other, self.center, self.order)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.center, a.order, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.center, a.order, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.center, a.order, b.coeffs - a.coeffs)

    def __neg__(self):
        return Jet(self.center, self.order, -self.coeffs)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            s = np.asarray(other, dtype=float)
            return Jet(self.center, self.order, self.coeffs * s[..., None])
        a, b = self._coerce(other)
        n = n_coeffs(a.order)
        outer = a.coeffs[..., :, None] * b.coeffs[..., None, :]
        return Jet(a.center, a.order, outer.reshape(outer.shape[:-2] + (n * n,)) @ _product_matrix(a.order))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            s = np.asarray(other, dtype=float)
            if np.any(np.abs(s) < DIV_EPS):
                raise DivisionByZeroValue("division by a (near) zero constant")
            return Jet(self.center, self.order, self.coeffs / s[..., None])
        a, b = self._coerce(other)
        return a * b.reciprocal()

    def __rtruediv__(self, other):
        a, b = self._coerce(other)
        return b * a.reciprocal()

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise TypeError("jets support non-negative integer powers only; use exp/log")
        result = Jet.constant(np.ones(self.shape), self.center, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def reciprocal(self) -> Jet:
        v = self.coeffs[..., 0]
        if np.any(np.abs(v) < DIV_EPS * (1.0 + self.scale)):
            raise DivisionByZeroValue(f"divisor value part {v} is below epsilon")
        return _compose(self, _series_reciprocal(v, self.order))

    # elementary functions ---------------------------------------------

    def exp(self) -> Jet:
        v = self.coeffs[..., 0]
        k = np.arange(self.order + 1)
        coef = np.exp(v)[..., None] / np.array([math.factorial(m) for m in k])
        return _compose(self, coef)

    def log(self) -> Jet:
        v = self.coeffs[..., 0]
        if np.any(v <= 0):
            raise DomainError(f"log of non-positive value {v}")
        coef = np.empty(v.shape + (self.order + 1,))
        coef[..., 0] = np.log(v)
        for m in range(1, self.order + 1):
            coef[..., m] = (-1) ** (m + 1) / (m * v ** m)
        return _compose(self, coef)

    def sqrt(self) -> Jet:
        v = self.coeffs[..., 0]
        if np.any(v <= 0):
            raise DomainError(f"sqrt of non-positive value {v}")
        coef = np.empty(v.shape + (self.order + 1,))
        for m in range(self.order + 1):
            coef[..., m] = _binom_half(m) * v ** (0.5 - m)
        return _compose(self, coef)

    def sin(self) -> Jet:
        return _compose(self, _trig_series(self.coeffs[..., 0], self.order, 0))

    def cos(self) -> Jet:
        return _compose(self, _trig_series(self.coeffs[..., 0], self.order, 1))


def _binom_half(m: int) -> float:
    out = 1.0
    for r in range(m):
        out *= (0.5 - r) / (r + 1)
    return out


def _series_reciprocal(v, order):
    m = np.arange(order + 1)
    return ((-1.0) ** m) / (np.asarray(v)[..., None] ** (m + 1))


def _trig_series(v, order, shift):
    # d^m sin = sin(v + m pi/2); cos is sin shifted by one derivative
    v = np.asarray(v)
    cycle = [np.sin(v), np.cos(v), -np.sin(v), -np.cos(v)]
    return np.stack([cycle[(m + shift) % 4] / math.factorial(m) for m in range(order + 1)], axis=-1)


def _compose(a: Jet, coef: np.ndarray) -> Jet:
    """Evaluate sum_m coef[m] * u^m with u = a - value(a) (nilpotent)."""
    u_c = np.array(a.coeffs)
    u_c[..., 0] = 0.0
    u = Jet(a.center, a.order, u_c)
    out = coef[..., 0][..., None] * np.eye(1, n_coeffs(a.order))[0]
    power = None
    for m in range(1, a.order + 1):
        power = u if power is None else power * u
        out = out + coef[..., m][..., None] * power.coeffs
    return Jet(a.center, a.order, out)


def _common_center(jets: Iterable[Jet]):
    jets = list(jets)
    c = jets[0].center
    for j in jets[1:]:
        if j.center != c:
            raise CenterMismatch(f"{c} != {j.center}")
    return c


# public operation surface --------------------------------------------------

def jet_variable(axis, point: Sequence[float], order: int = DEFAULT_ORDER) -> Jet:
    """Jet of the coordinate function ``axis`` (``'x'``, ``'y'``, ``'z'`` or 0..2) at ``point``."""
    if isinstance(axis, str):
        axis = AXES[axis]
    if order < 0:
        raise OrderExceeded("order must be >= 0")
    c = np.zeros(n_coeffs(order))
    c[0] = point[axis]
    if order >= 1:
        unit = [0, 0, 0]
        unit[axis] = 1
        c[_index(order)[tuple(unit)]] = 1.0
    return Jet(point, order, c)


def jet_constant(value: float, point: Sequence[float], order: int = DEFAULT_ORDER) -> Jet:
    return Jet.constant(value, point, order)


_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    try:
        fn = _ARITH[op]
    except KeyError:
        raise ValueError(f"unknown jet operation {op!r}") from None
    return fn(a, b)


_FUNCS = ("exp", "log", "sin", "cos", "sqrt")


def jet_func(a: Jet, f: str) -> Jet:
    if f not in _FUNCS:
        raise ValueError(f"unknown jet function {f!r}")
    return getattr(a, f)()


def extract_partial(a: Jet, multi_index: Sequence[int]):
    mi = tuple(int(m) for m in multi_index)
    if len(mi) != 3 or min(mi) < 0:
        raise ValueError(f"bad multi-index {multi_index}")
    if sum(mi) > a.order:
        raise OrderExceeded(f"multi-index {mi} exceeds jet order {a.order}")
    n = _index(a.order)[mi]
    fact = math.factorial(mi[0]) * math.factorial(mi[1]) * math.factorial(mi[2])
    v = fact * a.coeffs[..., n]
    return float(v) if np.ndim(v) == 0 else v


def derivatives(a: Jet) -> dict[tuple[int, int, int], float]:
    """All mixed partials of a scalar jet keyed by multi-index."""
    vals = a.coeffs * _factorials(a.order)
    return {m: float(vals[n]) for n, m in enumerate(multi_indices(a.order))}
