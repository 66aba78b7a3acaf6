"""Subalgebras of co(2,1) and co(3), and classification of connection-value spans.

Lorentzian parameters ``(p, a, b, c)`` refer to the matrix::

    [[p + a, b,     0    ],
     [c,     p,     b    ],
     [0,     c,     p - a]]

in the null frame with ``g = (theta^2)^2 - 2 theta^1 theta^3``. The ``c`` slot sits at
entries (2,1) and (3,2). For co(3) the same four slots hold ``p`` and the rotation
generators ``(r1, r2, r3)`` of ``p*I + [[0, -r3, r2], [r3, 0, -r1], [-r2, r1, 0]]``;
a rotation about the third axis is ``(0, 0, 0, r3)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EmptySampleSet, NotInCO
from .weyl import ConnectionMatrix, FrameMetric, WeylStructure, solve_connection

SPAN_RATIO = 1e-7
MEMBERSHIP_TOL = 1e-9
CO_TOL = 1e-8
P_MIN = 1e-6

# tie-break order among equal dimensions (most constrained first)
_PREFERENCE = ("Trivial", "Dq", "Fplus", "Fminus", "Gq", "Bq", "C", "E", "A", "Full")


def assemble(params: Sequence[float], metric: FrameMetric) -> np.ndarray:
    p, a, b, c = params
    if metric.signature == "lorentzian":
        return np.array([[p + a, b, 0.0], [c, p, b], [0.0, c, p - a]])
    r1, r2, r3 = a, b, c
    return np.array([[p, -r3, r2], [r3, p, -r1], [-r2, r1, p]])


def co_decompose(M, metric: FrameMetric, tol: float = CO_TOL) -> np.ndarray:
    """Parameters ``(p, a, b, c)`` of a matrix in the conformal algebra; ``NotInCO`` otherwise."""
    M = np.asarray(M, dtype=float)
    p = np.trace(M) / 3.0
    if metric.signature == "lorentzian":
        a = 0.5 * (M[0, 0] - M[2, 2])
        b = 0.5 * (M[0, 1] + M[1, 2])
        c = 0.5 * (M[1, 0] + M[2, 1])
        params = np.array([p, a, b, c])
    else:
        A = 0.5 * (M - M.T)
        params = np.array([p, A[2, 1], A[0, 2], A[1, 0]])
    resid = float(np.max(np.abs(M - assemble(params, metric))))
    if resid > tol * (1.0 + float(np.max(np.abs(M)))):
        raise NotInCO(f"matrix is not in co(signature={metric.signature}): residual {resid:.3e}")
    return params


def lie_residual(M, metric: FrameMetric) -> float:
    """|M^T g + g M - 2 p g| with p = trace/3."""
    M = np.asarray(M, dtype=float)
    g = metric.g
    p = np.trace(M) / 3.0
    return float(np.max(np.abs(M.T @ g + g @ M - 2 * p * g)))


# --------------------------------------------------------------------------
# catalog

@dataclass(frozen=True)
class SubalgebraId:
    tag: str
    q: float | None = None
    signature: str = "lorentzian"

    @property
    def constraints(self) -> tuple[Callable[[np.ndarray], np.ndarray], ...]:
        return _constraints(self.tag, self.q, self.signature)

    @property
    def dim(self) -> int:
        return 4 - len(self.constraints)

    def residual(self, vectors: np.ndarray) -> float:
        """Largest constraint violation over the rows of ``vectors``."""
        vectors = np.atleast_2d(vectors)
        if not self.constraints or vectors.size == 0:
            return 0.0 if self.tag != "Trivial" else float(np.max(np.abs(vectors), initial=0.0))
        return float(max(np.max(np.abs(c(vectors))) for c in self.constraints))

    def contains(self, vectors: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(vectors), initial=0.0)))
        return self.residual(vectors) <= tol * scale

    @property
    def label(self) -> str:
        return expected_algebra(self)

    def __str__(self):
        if self.q is None:
            return "Bq(q undetermined)" if self.tag == "Bq" else self.tag
        return f"{self.tag}(q={self.q:.6g})"


def _constraints(tag, q, signature):
    P = lambda v: v[:, 0]
    A = lambda v: v[:, 1]
    B = lambda v: v[:, 2]
    C = lambda v: v[:, 3]
    if tag == "Full":
        return ()
    if tag == "Trivial":
        return (P, A, B, C)
    if signature == "euclidean":
        # (a, b, c) = rotations about the first, second, third axis
        table = {
            "E": (A, B),
            "Gq": (A, B, lambda v: C(v) - q * P(v)),
        }
    else:
        table = {
            "A": (C,),
            "Bq": (C, lambda v: A(v) + (q + 1) * P(v)),
            "C": (C, B),
            "Dq": (C, B, lambda v: A(v) - (q + 1) * P(v)),
            "E": (A, lambda v: C(v) + B(v)),
            "Fplus": (C, A, lambda v: B(v) - P(v)),
            "Fminus": (C, A, lambda v: B(v) + P(v)),
            "Gq": (A, lambda v: B(v) - q * P(v), lambda v: C(v) + q * P(v)),
        }
    if tag not in table:
        raise KeyError(f"{tag} is not in the {signature} catalog")
    if tag == "Bq" and q is None and signature == "lorentzian":
        # q undetermined: only meaningful when p vanishes, where every B_q reads c = a = 0
        return (C, A)
    if tag in ("Bq", "Dq", "Gq") and q is None:
        raise ValueError(f"{tag} needs a parameter q")
    return table[tag]


CATALOG = {
    "lorentzian": ("A", "Bq", "C", "Dq", "E", "Fplus", "Fminus", "Gq", "Trivial", "Full"),
    "euclidean": ("E", "Gq", "Trivial", "Full"),
}

_CONTAINER = {"Bq": "A", "Dq": "C", "Gq": "E"}


def expected_algebra(sub: SubalgebraId) -> str:
    """Abstract Lie algebra of a catalog member, as listed for the canonical families."""
    t = sub.tag
    if t == "A":
        return "a_1⊕ℝ"
    if t == "Bq":
        return "ℝ²" if sub.q is not None and abs(sub.q + 1) < 1e-9 else "a_1"
    if t in ("C", "E"):
        return "ℝ²"
    if t in ("Dq", "Fplus", "Fminus", "Gq"):
        return "ℝ"
    if t == "Trivial":
        return "0"
    return "co(3)" if sub.signature == "euclidean" else "co(2,1)"


def fit_q(tag: str, vectors: np.ndarray, signature: str = "lorentzian"):
    """Least-squares q for a one-parameter family; ``(None, inf)`` when every p is ~0."""
    v = np.atleast_2d(vectors)
    p = v[:, 0]
    mask = np.abs(p) > P_MIN
    if not np.any(mask):
        return None, float("inf")
    p, a, b, c = v[mask].T
    if signature == "euclidean":
        if tag != "Gq":
            raise KeyError(tag)
        q = float(p @ c / (p @ p))
        return q, float(np.max(np.abs(c - q * p)))
    if tag == "Bq":
        # a + (q+1) p = 0
        q = float(-(p @ (a + p)) / (p @ p))
        res = a + (q + 1) * p
    elif tag == "Dq":
        q = float((p @ (a - p)) / (p @ p))
        res = a - (q + 1) * p
    elif tag == "Gq":
        # b = q p and c = -q p, stacked
        q = float((p @ b - p @ c) / (2 * (p @ p)))
        res = np.concatenate([b - q * p, c + q * p])
    else:
        raise KeyError(tag)
    return q, float(np.max(np.abs(res)))


# --------------------------------------------------------------------------
# classification

@dataclass
class HolonomyReport:
    classified: SubalgebraId
    fitted_q: float | None
    fit_residual: float | None
    span_dim: int
    membership_residuals: list[float]
    samples: list[tuple[float, float, float]]
    singular_values: list[float] = field(default_factory=list)

    @property
    def label(self) -> str:
        return expected_algebra(self.classified)

    @property
    def max_membership_residual(self) -> float:
        return max(self.membership_residuals, default=0.0)

    def to_dict(self) -> dict:
        return {
            "classified": self.classified.tag,
            "q": self.classified.q,
            "label": self.label,
            "fitted_q": self.fitted_q,
            "fit_residual": self.fit_residual,
            "span_dim": self.span_dim,
            "max_membership_residual": self.max_membership_residual,
            "singular_values": self.singular_values,
            "n_samples": len(self.samples),
        }


def numerical_span(vectors: np.ndarray, ratio: float = SPAN_RATIO, abs_tol: float = 1e-12):
    """Rank and singular values of the row span."""
    v = np.atleast_2d(vectors)
    if v.size == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(v, compute_uv=False)
    if s[0] <= abs_tol:
        return 0, s
    return int(np.sum(s >= ratio * s[0])), s


def classify_vectors(vectors: np.ndarray, signature: str = "lorentzian", tol: float = MEMBERSHIP_TOL,
                     group_sizes: Sequence[int] | None = None):
    """Minimal catalog member containing every row of ``vectors``.

    Returns ``(SubalgebraId, fitted_q, fit_residual, span_dim, singular_values)``.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    rank, s = numerical_span(v)
    scale = max(1.0, float(np.max(np.abs(v), initial=0.0)))
    if rank == 0:
        return SubalgebraId("Trivial", None, signature), None, None, 0, s.tolist()
    candidates = []
    fits = {}
    for tag in CATALOG[signature]:
        if tag in ("Trivial", "Full"):
            continue
        q = None
        if tag in ("Bq", "Dq", "Gq"):
            q, res = fit_q(tag, v, signature)
            if q is None and tag != "Bq":
                continue
            if tag == "Dq" and q <= -1:
                continue
            fits[tag] = (q, res if q is not None else None)
        sub = SubalgebraId(tag, q, signature)
        if sub.residual(v) <= tol * scale:
            candidates.append(sub)
    if not candidates:
        return SubalgebraId("Full", None, signature), None, None, rank, s.tolist()
    best = min(candidates, key=lambda c: (c.dim, _PREFERENCE.index(c.tag)))
    q, res = fits.get(best.tag, (None, None))
    return best, q, res, rank, s.tolist()


def connection_vectors(conns: Sequence[ConnectionMatrix]) -> np.ndarray:
    return np.concatenate([c.params() for c in conns], axis=0)


def classify(W: WeylStructure, samples: Sequence[Sequence[float]], order: int = 2,
             tol: float = MEMBERSHIP_TOL, conns: Sequence[ConnectionMatrix] | None = None) -> HolonomyReport:
    """Classify the span of ``Gamma(e_k)`` over all sample points in the given frame."""
    samples = [tuple(float(c) for c in p) for p in samples]
    if not samples:
        raise EmptySampleSet("classify needs at least one sample point")
    if conns is None:
        conns = [solve_connection(W, p, order) for p in samples]
    per_point = [c.params() for c in conns]
    vectors = np.concatenate(per_point, axis=0)
    sub, q, res, rank, s = classify_vectors(vectors, W.metric.signature, tol)
    residuals = [sub.residual(v) for v in per_point]
    return HolonomyReport(sub, q, res, rank, residuals, samples, s)


def container(sub: SubalgebraId) -> SubalgebraId:
    """Unparametrized catalog member containing a one-parameter family."""
    return SubalgebraId(_CONTAINER.get(sub.tag, sub.tag), None, sub.signature)


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X
