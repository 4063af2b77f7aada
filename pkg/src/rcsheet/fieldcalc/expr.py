"""Expression trees for chart fields: parser, jet evaluator and symbolic derivative.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | factor
    factor := base ('^' ['-'] integer)?
    base   := number | 'x' | 'y' | func '(' expr ')' | 'atan2' '(' expr ',' expr ')'
            | '(' expr ')'

with ``func`` one of ``exp, ln, sin, cos, sqrt``.  Unary signs and negative
integer exponents extend the core grammar; every string of the core grammar
parses to the same tree.
"""

import re
from dataclasses import dataclass

import numpy as np

from ..errors import ParseError
from .jet import Jet, atan2 as jet_atan2

UNARY = ("exp", "ln", "sin", "cos", "sqrt")


class Node:
    """Base class of expression nodes (immutable)."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, lift(other))

    def __radd__(self, other):
        return add(lift(other), self)

    def __sub__(self, other):
        return sub(self, lift(other))

    def __rsub__(self, other):
        return sub(lift(other), self)

    def __mul__(self, other):
        return mul(self, lift(other))

    def __rmul__(self, other):
        return mul(lift(other), self)

    def __truediv__(self, other):
        return div(self, lift(other))

    def __rtruediv__(self, other):
        return div(lift(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)


@dataclass(frozen=True, eq=False)
class Const(Node):
    value: float

    def __str__(self):
        return repr(float(self.value)) if self.value >= 0 else f"({self.value!r})"


@dataclass(frozen=True, eq=False)
class Var(Node):
    axis: int

    def __str__(self):
        return "xy"[self.axis]


@dataclass(frozen=True, eq=False)
class Binary(Node):
    op: str
    left: Node
    right: Node

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True, eq=False)
class Neg(Node):
    arg: Node

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True, eq=False)
class Pow(Node):
    base: Node
    n: int

    def __str__(self):
        return f"({self.base}^{self.n})"


@dataclass(frozen=True, eq=False)
class Func(Node):
    name: str
    arg: Node

    def __str__(self):
        return f"{self.name}({self.arg})"


@dataclass(frozen=True, eq=False)
class Atan2(Node):
    num: Node
    den: Node

    def __str__(self):
        return f"atan2({self.num}, {self.den})"


@dataclass(frozen=True, eq=False)
class Apply(Node):
    """A univariate function with known derivatives applied to a subtree.

    ``fn.derivatives(values)`` must return the list ``[g, g', g'', g''']``
    evaluated at ``values``; ``fn.name`` is used for printing.
    """

    fn: object
    arg: Node

    def __str__(self):
        return f"{getattr(self.fn, 'name', 'g')}({self.arg})"


ZERO = Const(0.0)
ONE = Const(1.0)


def lift(obj):
    if isinstance(obj, Node):
        return obj
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return Const(float(obj))
    raise TypeError(f"cannot use {type(obj).__name__} in a field expression")


def _const(n):
    return n.value if isinstance(n, Const) else None


# light constant folding keeps symbolic derivatives small
def add(a, b):
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca + cb)
    if ca == 0:
        return b
    if cb == 0:
        return a
    return Binary("+", a, b)


def sub(a, b):
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca - cb)
    if cb == 0:
        return a
    if ca == 0:
        return neg(b)
    return Binary("-", a, b)


def mul(a, b):
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca * cb)
    if ca == 0 or cb == 0:
        return ZERO
    if ca == 1:
        return b
    if cb == 1:
        return a
    if ca == -1:
        return neg(b)
    if cb == -1:
        return neg(a)
    return Binary("*", a, b)


def div(a, b):
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None and cb != 0:
        return Const(ca / cb)
    if ca == 0:
        return ZERO
    if cb == 1:
        return a
    return Binary("/", a, b)


def neg(a):
    ca = _const(a)
    if ca is not None:
        return Const(-ca)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a, n):
    if not isinstance(n, (int, np.integer)):
        raise TypeError("only integer exponents are supported")
    n = int(n)
    ca = _const(a)
    if ca is not None and (n >= 0 or ca != 0):
        return Const(ca**n)
    if n == 0:
        return ONE
    if n == 1:
        return a
    return Pow(a, n)


def func(name, arg):
    if name not in UNARY:
        raise ValueError(f"unknown function {name!r}")
    return Func(name, arg)


# ---------------------------------------------------------------------------
# evaluation


def evaluate(node, x, y):
    """Evaluate ``node`` with coordinate jets ``x`` and ``y``."""
    cache = {}

    def ev(n):
        key = id(n)
        hit = cache.get(key)
        if hit is not None:
            return hit[1]
        out = _ev(n)
        cache[key] = (n, out)
        return out

    def _ev(n):
        if isinstance(n, Const):
            return Jet.constant(np.full(x.batch_shape, n.value), x.order)
        if isinstance(n, Var):
            return x if n.axis == 0 else y
        if isinstance(n, Binary):
            a, b = ev(n.left), ev(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            return a / b
        if isinstance(n, Neg):
            return -ev(n.arg)
        if isinstance(n, Pow):
            return ev(n.base) ** n.n
        if isinstance(n, Func):
            a = ev(n.arg)
            return {"exp": a.exp, "ln": a.log, "sin": a.sin, "cos": a.cos, "sqrt": a.sqrt}[n.name]()
        if isinstance(n, Atan2):
            return jet_atan2(ev(n.num), ev(n.den))
        if isinstance(n, Apply):
            a = ev(n.arg)
            return a.compose(n.fn.derivatives(a.value))
        raise TypeError(f"unknown node {n!r}")

    return ev(node)


# ---------------------------------------------------------------------------
# symbolic differentiation


def diff(node, axis):
    """Symbolic partial derivative of ``node`` along ``axis`` (0 for x, 1 for y)."""
    cache = {}

    def d(n):
        key = id(n)
        hit = cache.get(key)
        if hit is not None:
            return hit[1]
        out = _d(n)
        cache[key] = (n, out)
        return out

    def _d(n):
        if isinstance(n, Const):
            return ZERO
        if isinstance(n, Var):
            return ONE if n.axis == axis else ZERO
        if isinstance(n, Binary):
            a, b = n.left, n.right
            da, db = d(a), d(b)
            if n.op == "+":
                return add(da, db)
            if n.op == "-":
                return sub(da, db)
            if n.op == "*":
                return add(mul(da, b), mul(a, db))
            # (a/b)' = a'/b - a b'/b^2
            return sub(div(da, b), div(mul(a, db), power(b, 2)))
        if isinstance(n, Neg):
            return neg(d(n.arg))
        if isinstance(n, Pow):
            return mul(mul(Const(float(n.n)), power(n.base, n.n - 1)), d(n.base))
        if isinstance(n, Func):
            a = n.arg
            da = d(a)
            if _const(da) == 0:
                return ZERO
            if n.name == "exp":
                return mul(n, da)
            if n.name == "ln":
                return div(da, a)
            if n.name == "sin":
                return mul(Func("cos", a), da)
            if n.name == "cos":
                return neg(mul(Func("sin", a), da))
            return div(da, mul(Const(2.0), n))
        if isinstance(n, Atan2):
            u, v = n.num, n.den
            du, dv = d(u), d(v)
            return div(sub(mul(du, v), mul(u, dv)), add(power(u, 2), power(v, 2)))
        if isinstance(n, Apply):
            deriv = getattr(n.fn, "derivative", None)
            if deriv is None:
                raise NotImplementedError(f"{n.fn!r} provides no derivative function")
            return mul(Apply(deriv, n.arg), d(n.arg))
        raise TypeError(f"unknown node {n!r}")

    return d(node)


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + stripped]!r}", pos + stripped)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Binary(op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = Binary(op, node, rhs)
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            arg = self.unary()
            return Neg(arg) if val == "-" else arg
        return self.factor()

    def factor(self):
        node = self.base()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, val, pos = self.take()
            if kind != "num" or not val.isdigit():
                raise ParseError("exponent must be an integer literal", pos)
            node = Pow(node, sign * int(val))
            if self.peek()[1] == "^":
                raise ParseError("chained exponents need parentheses", self.peek()[2])
        return node

    def base(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val == "x":
                return Var(0)
            if val == "y":
                return Var(1)
            if val in UNARY:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            if val == "atan2":
                self.expect("(")
                num = self.expr()
                self.expect(",")
                den = self.expr()
                self.expect(")")
                return Atan2(num, den)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos)


def parse(text):
    """Parse ``text`` into an expression tree; raises :class:`ParseError`."""
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    return _Parser(text).parse()
