"""Scalar fields on R^3 given as expressions in x, y, z.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := ("-")? power
    power  := atom ("^" integer)?
    atom   := number | "x" | "y" | "z" | "pi" | "e" | func "(" expr ")" | "(" expr ")"
    func   := "exp" | "log" | "sin" | "cos" | "sqrt"

Parsed fields are immutable trees that evaluate either to floats or to
:class:`~weyl3.jets.Jet` values, and that can be differentiated symbolically
(used to form potentials such as ``K_y dx`` from user input).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

from . import jets
from .errors import (DivisionByZeroValue, DomainError, ExpressionSyntaxError,
                     NonIntegerExponent, UnknownIdentifier)

VARIABLES = ("x", "y", "z")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Const:
    name: str
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Neg:
    arg: "Node"
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"
    offset: int = field(default=-1, compare=False)


Node = Union[Num, Var, Const, Neg, Bin, Pow, Call]


# --------------------------------------------------------------------------
# lexer / parser

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(src: str):
    pos = 0
    out = []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, val, off = self.take()
        if val != text:
            raise ExpressionSyntaxError(f"expected {text!r}, found {val or 'end of input'!r}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            _, op, off = self.take()
            node = Bin(op, node, self.term(), off)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/"):
            _, op, off = self.take()
            node = Bin(op, node, self.factor(), off)
        return node

    def factor(self):
        if self.peek()[1] == "-":
            _, _, off = self.take()
            return Neg(self.power(), off)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            _, _, off = self.take()
            kind, val, eoff = self.take()
            if kind != "num":
                raise ExpressionSyntaxError("expected integer exponent", eoff)
            if not val.isdigit():
                raise NonIntegerExponent(f"exponent {val!r} is not an integer literal", eoff)
            return Pow(base, int(val), off)
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val), off)
        if kind == "ident":
            if val in VARIABLES:
                return Var(val, off)
            if val in CONSTANTS:
                return Const(val, off)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg, off)
            raise UnknownIdentifier(f"unknown identifier {val!r}", off)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(f"unexpected {val or 'end of input'!r}", off)


# --------------------------------------------------------------------------
# serialization

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def serialize(node: Node) -> str:
    """Text that parses back to an identical tree."""
    return _ser(node)


def _ser(node: Node) -> str:
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({_ser(node.arg)})"
    if isinstance(node, Pow):
        base = _ser(node.base)
        if not isinstance(node.base, (Num, Var, Const, Call)):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, Neg):
        inner = _ser(node.arg)
        if not isinstance(node.arg, (Num, Var, Const, Call, Pow)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Bin):
        p = _PREC[node.op]
        left = _ser(node.left)
        if isinstance(node.left, Bin) and _PREC[node.left.op] < p:
            left = f"({left})"
        right = _ser(node.right)
        # left-associative: an equal-precedence right operand needs parentheses
        if isinstance(node.right, Bin) and _PREC[node.right.op] <= p:
            right = f"({right})"
        if isinstance(node.right, Neg):
            # factor := "-" power, so a negated power is fine after * or /, and after + or -
            if not isinstance(node.right.arg, (Num, Var, Const, Call, Pow)):
                right = f"({right})"
        sep = f" {node.op} " if p == 1 else node.op
        return f"{left}{sep}{right}"
    raise TypeError(node)


# --------------------------------------------------------------------------
# smart constructors (light folding keeps derivative trees small)

def _num(v: float) -> Node:
    return Num(float(v)) if v >= 0 else Neg(Num(float(-v)))


def _const_value(n: Node):
    if isinstance(n, Num):
        return n.value
    if isinstance(n, Neg) and isinstance(n.arg, Num):
        return -n.arg.value
    return None


def add(a: Node, b: Node) -> Node:
    va, vb = _const_value(a), _const_value(b)
    if va is not None and vb is not None:
        return _num(va + vb)
    if va == 0:
        return b
    if vb == 0:
        return a
    if isinstance(b, Neg):
        return Bin("-", a, b.arg)
    return Bin("+", a, b)


def sub(a: Node, b: Node) -> Node:
    va, vb = _const_value(a), _const_value(b)
    if va is not None and vb is not None:
        return _num(va - vb)
    if vb == 0:
        return a
    if va == 0:
        return neg(b)
    if isinstance(b, Neg):
        return Bin("+", a, b.arg)
    return Bin("-", a, b)


def neg(a: Node) -> Node:
    va = _const_value(a)
    if va is not None:
        return _num(-va)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Node, b: Node) -> Node:
    va, vb = _const_value(a), _const_value(b)
    if va is not None and vb is not None:
        return _num(va * vb)
    if va == 0 or vb == 0:
        return Num(0.0)
    if va == 1:
        return b
    if vb == 1:
        return a
    if va == -1:
        return neg(b)
    if vb == -1:
        return neg(a)
    if isinstance(a, Neg) and isinstance(b, Neg):
        return mul(a.arg, b.arg)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    return Bin("*", a, b)


def div(a: Node, b: Node) -> Node:
    va, vb = _const_value(a), _const_value(b)
    if vb == 1:
        return a
    if va == 0 and vb != 0:
        return Num(0.0)
    if va is not None and vb is not None and vb != 0:
        return _num(va / vb)
    if isinstance(a, Neg):
        return neg(div(a.arg, b))
    if isinstance(b, Neg):
        return neg(div(a, b.arg))
    return Bin("/", a, b)


def power(a: Node, n: int) -> Node:
    if n == 0:
        return Num(1.0)
    if n == 1:
        return a
    va = _const_value(a)
    if va is not None:
        return _num(va ** n)
    return Pow(a, n)


def call(func: str, a: Node) -> Node:
    va = _const_value(a)
    if va == 0 and func in ("exp", "cos"):
        return Num(1.0)
    if va == 0 and func in ("sin", "sqrt"):
        return Num(0.0)
    if va == 1 and func == "log":
        return Num(0.0)
    return Call(func, a)


# --------------------------------------------------------------------------
# symbolic differentiation

def differentiate(node: Node, var: str) -> Node:
    if isinstance(node, Num) or isinstance(node, Const):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0 if node.name == var else 0.0)
    if isinstance(node, Neg):
        return neg(differentiate(node.arg, var))
    if isinstance(node, Bin):
        da = differentiate(node.left, var)
        db = differentiate(node.right, var)
        if node.op == "+":
            return add(da, db)
        if node.op == "-":
            return sub(da, db)
        if node.op == "*":
            return add(mul(da, node.right), mul(node.left, db))
        # (a/b)' = a'/b - a b' / b^2
        return sub(div(da, node.right), div(mul(node.left, db), power(node.right, 2)))
    if isinstance(node, Pow):
        n = node.exponent
        if n == 0:
            return Num(0.0)
        return mul(mul(Num(float(n)), power(node.base, n - 1)), differentiate(node.base, var))
    if isinstance(node, Call):
        u = node.arg
        du = differentiate(u, var)
        if _const_value(du) == 0:
            return Num(0.0)
        if node.func == "exp":
            outer = node
        elif node.func == "log":
            return div(du, u)
        elif node.func == "sin":
            outer = call("cos", u)
        elif node.func == "cos":
            outer = neg(call("sin", u))
        else:  # sqrt
            return div(du, mul(Num(2.0), node))
        return mul(outer, du)
    raise TypeError(node)


def free_variables(node: Node) -> frozenset:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, (Num, Const)):
        return frozenset()
    if isinstance(node, (Neg, Pow, Call)):
        return free_variables(node.arg if not isinstance(node, Pow) else node.base)
    return free_variables(node.left) | free_variables(node.right)


# --------------------------------------------------------------------------
# evaluation

def _where(node: Node) -> str:
    loc = f" at offset {node.offset}" if node.offset >= 0 else ""
    return f"in sub-expression {serialize(node)!r}{loc}"


def _eval_float(node: Node, env) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval_float(node.arg, env)
    if isinstance(node, Bin):
        a = _eval_float(node.left, env)
        b = _eval_float(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if abs(b) < jets.DIV_EPS:
            raise DivisionByZeroValue(f"division by zero {_where(node)}")
        return a / b
    if isinstance(node, Pow):
        return _eval_float(node.base, env) ** node.exponent
    if isinstance(node, Call):
        a = _eval_float(node.arg, env)
        if node.func in ("log", "sqrt") and a <= 0:
            raise DomainError(f"{node.func} of non-positive value {a} {_where(node)}")
        return getattr(math, node.func)(a)
    raise TypeError(node)


def _eval_jet(node: Node, env) -> jets.Jet:
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Num):
        return jets.Jet.constant(node.value, env["_center"], env["_order"])
    if isinstance(node, Const):
        return jets.Jet.constant(CONSTANTS[node.name], env["_center"], env["_order"])
    if isinstance(node, Neg):
        return -_eval_jet(node.arg, env)
    if isinstance(node, Bin):
        if node.op == "*" and isinstance(node.left, Num):
            return _eval_jet(node.right, env) * node.left.value
        a = _eval_jet(node.left, env)
        b = _eval_jet(node.right, env)
        try:
            return jets.jet_arith(a, b, {"+": "add", "-": "sub", "*": "mul", "/": "div"}[node.op])
        except DivisionByZeroValue as exc:
            raise DivisionByZeroValue(f"{exc} {_where(node)}") from None
    if isinstance(node, Pow):
        return _eval_jet(node.base, env) ** node.exponent
    if isinstance(node, Call):
        a = _eval_jet(node.arg, env)
        try:
            return jets.jet_func(a, node.func)
        except DomainError as exc:
            raise DomainError(f"{exc} {_where(node)}") from None
    raise TypeError(node)


# --------------------------------------------------------------------------
# public type

class ScalarField:
    """An immutable parsed expression over (x, y, z)."""

    __slots__ = ("node",)

    def __init__(self, node: Node):
        object.__setattr__(self, "node", node)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    @classmethod
    def parse(cls, src: str) -> ScalarField:
        return parse_field(src)

    @classmethod
    def constant(cls, value: float) -> ScalarField:
        return cls(_num(value))

    @classmethod
    def variable(cls, name: str) -> ScalarField:
        if name not in VARIABLES:
            raise ValueError(name)
        return cls(Var(name))

    def __call__(self, x: float, y: float, z: float) -> float:
        return _eval_float(self.node, {"x": x, "y": y, "z": z})

    def jet(self, point: Sequence[float], order: int = jets.DEFAULT_ORDER) -> jets.Jet:
        return eval_jet(self, point, order)

    def diff(self, var: str) -> ScalarField:
        return ScalarField(differentiate(self.node, var))

    @property
    def variables(self) -> frozenset:
        return free_variables(self.node)

    @property
    def is_zero(self) -> bool:
        return _const_value(self.node) == 0

    def __str__(self):
        return serialize(self.node)

    def __repr__(self):
        return f"ScalarField({serialize(self.node)!r})"

    def __eq__(self, other):
        return isinstance(other, ScalarField) and self.node == other.node

    def __hash__(self):
        return hash(self.node)

    # algebra on trees ---------------------------------------------------

    @staticmethod
    def _node(other) -> Node:
        if isinstance(other, ScalarField):
            return other.node
        if isinstance(other, str):
            return parse_field(other).node
        return _num(float(other))

    def __add__(self, other):
        return ScalarField(add(self.node, self._node(other)))

    def __radd__(self, other):
        return ScalarField(add(self._node(other), self.node))

    def __sub__(self, other):
        return ScalarField(sub(self.node, self._node(other)))

    def __rsub__(self, other):
        return ScalarField(sub(self._node(other), self.node))

    def __mul__(self, other):
        return ScalarField(mul(self.node, self._node(other)))

    def __rmul__(self, other):
        return ScalarField(mul(self._node(other), self.node))

    def __truediv__(self, other):
        return ScalarField(div(self.node, self._node(other)))

    def __rtruediv__(self, other):
        return ScalarField(div(self._node(other), self.node))

    def __neg__(self):
        return ScalarField(neg(self.node))

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise TypeError("integer exponents only")
        return ScalarField(power(self.node, n))

    def exp(self):
        return ScalarField(call("exp", self.node))

    def log(self):
        return ScalarField(call("log", self.node))

    def sqrt(self):
        return ScalarField(call("sqrt", self.node))

    def sin(self):
        return ScalarField(call("sin", self.node))

    def cos(self):
        return ScalarField(call("cos", self.node))


def parse_field(src: str) -> ScalarField:
    if not src or not src.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return ScalarField(_Parser(src).parse())


def as_field(value) -> ScalarField:
    if isinstance(value, ScalarField):
        return value
    if isinstance(value, str):
        return parse_field(value)
    return ScalarField.constant(float(value))


def eval_jet(f: ScalarField, point: Sequence[float], order: int = jets.DEFAULT_ORDER) -> jets.Jet:
    point = tuple(float(p) for p in point)
    env = {v: jets.jet_variable(v, point, order) for v in VARIABLES}
    env["_center"] = point
    env["_order"] = order
    return _eval_jet(f.node, env)
