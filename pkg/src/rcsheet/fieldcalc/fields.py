"""Scalar chart fields, domains, points and grids."""

from dataclasses import dataclass
from math import inf

import numpy as np

from ..errors import DomainError, NonFiniteError
from . import expr as ex
from .jet import MAX_ORDER, Jet


@dataclass(frozen=True)
class Point2:
    """A chart point, or a batch of points when the coordinates are arrays."""

    u1: object
    u2: object

    def __post_init__(self):
        u1 = np.asarray(self.u1, dtype=float)
        u2 = np.asarray(self.u2, dtype=float)
        u1, u2 = np.broadcast_arrays(u1, u2)
        if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))):
            raise DomainError("point coordinates must be finite")
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)

    @property
    def shape(self):
        return self.u1.shape

    def __iter__(self):
        yield self.u1
        yield self.u2

    def __getitem__(self, i):
        return (self.u1, self.u2)[i]

    def shifted(self, d1, d2):
        return Point2(self.u1 + d1, self.u2 + d2)

    @property
    def z(self):
        return self.u1 + 1j * self.u2


def as_point(p):
    """Coerce a tuple, complex number or :class:`Point2` to :class:`Point2`."""
    if isinstance(p, Point2):
        return p
    if isinstance(p, (complex, np.complexfloating)) or (
        isinstance(p, np.ndarray) and np.iscomplexobj(p)
    ):
        return Point2(np.real(p), np.imag(p))
    u1, u2 = p
    return Point2(u1, u2)


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Rect:
    """Closed coordinate rectangle; infinite bounds give half-planes or the plane."""

    x0: float = -inf
    x1: float = inf
    y0: float = -inf
    y1: float = inf

    def contains(self, u1, u2):
        return (u1 >= self.x0) & (u1 <= self.x1) & (u2 >= self.y0) & (u2 <= self.y1)

    def __str__(self):
        return f"[{self.x0}, {self.x1}] x [{self.y0}, {self.y1}]"


@dataclass(frozen=True)
class Disk:
    """Closed disk of radius ``r`` about ``(cx, cy)``."""

    r: float
    cx: float = 0.0
    cy: float = 0.0

    def contains(self, u1, u2):
        return (u1 - self.cx) ** 2 + (u2 - self.cy) ** 2 <= self.r**2

    def __str__(self):
        return f"disk(r={self.r}, c=({self.cx}, {self.cy}))"


@dataclass(frozen=True)
class Intersection:
    parts: tuple

    def contains(self, u1, u2):
        ok = True
        for d in self.parts:
            ok = ok & d.contains(u1, u2)
        return ok

    def __str__(self):
        return " & ".join(str(d) for d in self.parts)


PLANE = Rect()


def intersect(a, b):
    if a is b or b == PLANE:
        return a
    if a == PLANE:
        return b
    if isinstance(a, Rect) and isinstance(b, Rect):
        return Rect(max(a.x0, b.x0), min(a.x1, b.x1), max(a.y0, b.y0), min(a.y1, b.y1))
    pa = a.parts if isinstance(a, Intersection) else (a,)
    pb = b.parts if isinstance(b, Intersection) else (b,)
    return Intersection(pa + tuple(d for d in pb if d not in pa))


# ---------------------------------------------------------------------------
# fields


class ScalarField2:
    """Closed-form scalar field on a chart domain with exact order-3 jets.

    Fields are immutable.  Arithmetic between fields (and with numbers)
    builds new fields; the domain of the result is the intersection of the
    operand domains.

    Parameters
    ----------
    node : expr.Node
        Expression tree.
    domain : Rect, Disk or Intersection
        Where the field may be evaluated.
    """

    __slots__ = ("node", "domain")

    def __init__(self, node, domain=PLANE):
        object.__setattr__(self, "node", ex.lift(node))
        object.__setattr__(self, "domain", domain)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField2 is immutable")

    def __repr__(self):
        return f"ScalarField2({self.node}, domain={self.domain})"

    def __str__(self):
        return str(self.node)

    def jet(self, p, order=MAX_ORDER):
        return eval_jet(self, p, order)

    def __call__(self, p):
        return eval_jet(self, p, 0).value

    def diff(self, axis):
        """Field of the partial derivative along ``axis``."""
        return ScalarField2(ex.diff(self.node, axis), self.domain)

    def on(self, domain):
        """Same expression restricted to ``domain``."""
        return ScalarField2(self.node, intersect(self.domain, domain))

    def _binary(self, other, fn, swap=False):
        other = as_field(other)
        dom = intersect(self.domain, other.domain)
        a, b = (other.node, self.node) if swap else (self.node, other.node)
        return ScalarField2(fn(a, b), dom)

    def __add__(self, other):
        return self._binary(other, ex.add)

    def __radd__(self, other):
        return self._binary(other, ex.add, swap=True)

    def __sub__(self, other):
        return self._binary(other, ex.sub)

    def __rsub__(self, other):
        return self._binary(other, ex.sub, swap=True)

    def __mul__(self, other):
        return self._binary(other, ex.mul)

    def __rmul__(self, other):
        return self._binary(other, ex.mul, swap=True)

    def __truediv__(self, other):
        return self._binary(other, ex.div)

    def __rtruediv__(self, other):
        return self._binary(other, ex.div, swap=True)

    def __neg__(self):
        return ScalarField2(ex.neg(self.node), self.domain)

    def __pow__(self, n):
        return ScalarField2(ex.power(self.node, n), self.domain)


def as_field(obj, domain=PLANE):
    """Coerce an expression string, number, node or field to :class:`ScalarField2`."""
    if isinstance(obj, ScalarField2):
        return obj if domain == PLANE else obj.on(domain)
    if isinstance(obj, str):
        return ScalarField2(ex.parse(obj), domain)
    if isinstance(obj, ex.Node):
        return ScalarField2(obj, domain)
    return ScalarField2(ex.lift(obj), domain)


def parse_field(text, domain=PLANE):
    """Parse an expression in ``x`` and ``y`` into a :class:`ScalarField2`."""
    return ScalarField2(ex.parse(text), domain)


def constant(value, domain=PLANE):
    return ScalarField2(ex.Const(float(value)), domain)


def coordinate(axis, domain=PLANE):
    return ScalarField2(ex.Var(axis), domain)


def _unary(name):
    def f(arg):
        arg = as_field(arg)
        return ScalarField2(ex.func(name, arg.node), arg.domain)

    f.__name__ = name
    f.__doc__ = f"Field ``{name}(arg)``."
    return f


exp = _unary("exp")
ln = _unary("ln")
sin = _unary("sin")
cos = _unary("cos")
sqrt = _unary("sqrt")


def atan2(u, v):
    u, v = as_field(u), as_field(v)
    return ScalarField2(ex.Atan2(u.node, v.node), intersect(u.domain, v.domain))


def apply(fn, arg):
    """Field ``fn(arg)`` for a univariate ``fn`` exposing ``derivatives``."""
    arg = as_field(arg)
    return ScalarField2(ex.Apply(fn, arg.node), arg.domain)


def eval_jet(f, p, order=MAX_ORDER):
    """Exact jet of ``f`` at ``p``.

    Raises
    ------
    DomainError
        If ``p`` lies outside the field's domain or an intermediate leaves the
        domain of ``ln``, ``sqrt`` or division.
    NonFiniteError
        If any jet entry is NaN or infinite.
    """
    f = as_field(f)
    p = as_point(p)
    inside = f.domain.contains(p.u1, p.u2)
    if not np.all(inside):
        raise DomainError(f"point outside the field domain {f.domain}")
    x = Jet.variable(p.u1, 0, order)
    y = Jet.variable(p.u2, 1, order)
    with np.errstate(all="ignore"):
        out = ex.evaluate(f.node, x, y)
    if not out.all_finite():
        raise NonFiniteError(f"non-finite value while evaluating {f}")
    return out


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid over a rectangle, optionally masked to a centred disk.

    Samples are ordered row-major with ``y`` as the slow index.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    h_fd: float = 1e-3
    disk_radius: float = None

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grids need at least two samples per axis")
        if not self.h_fd > 0:
            raise ValueError("h_fd must be positive")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("empty grid bounds")

    @classmethod
    def square(cls, half_width, n, **kw):
        return cls(-half_width, half_width, -half_width, half_width, n, n, **kw)

    @classmethod
    def disk(cls, radius, n, **kw):
        """``n`` x ``n`` grid on the bounding square, masked to ``|z| <= radius``."""
        return cls(-radius, radius, -radius, radius, n, n, disk_radius=radius, **kw)

    @property
    def hx(self):
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def hy(self):
        return (self.y1 - self.y0) / (self.ny - 1)

    def axes(self):
        return np.linspace(self.x0, self.x1, self.nx), np.linspace(self.y0, self.y1, self.ny)

    def mesh(self):
        xs, ys = self.axes()
        return np.meshgrid(xs, ys)

    def mask(self):
        X, Y = self.mesh()
        if self.disk_radius is None:
            return np.ones_like(X, dtype=bool)
        return X**2 + Y**2 <= self.disk_radius**2 * (1 + 1e-12)

    def points(self):
        """All grid samples (inside the disk, if any) as one batched point."""
        X, Y = self.mesh()
        m = self.mask()
        return Point2(X[m], Y[m])

    @property
    def domain(self):
        if self.disk_radius is None:
            return Rect(self.x0, self.x1, self.y0, self.y1)
        return Disk(self.disk_radius)
