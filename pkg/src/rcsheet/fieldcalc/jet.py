"""Truncated bivariate Taylor jets.

A jet of order ``k`` stores the Taylor coefficients ``c_ij`` (``i + j <= k``)
of a function of two variables about a base point, so that
``d^(i+j) f / dx^i dy^j = i! j! c_ij``.  The monomials are ordered by total
degree::

    (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), (3,0), (2,1), (1,2), (0,3)

Coefficient arrays have shape ``(N, *batch)`` so a single jet can describe a
whole grid of base points at once.  Differentiating a jet lowers its order by
one; binary operations truncate to the smaller order.
"""

from math import factorial

import numpy as np

from ..errors import DomainError

MAX_ORDER = 3
MONOMIALS = [(i - j, j) for i in range(MAX_ORDER + 1) for j in range(i + 1)]
SIZE = {k: (k + 1) * (k + 2) // 2 for k in range(MAX_ORDER + 1)}
_INDEX = {m: n for n, m in enumerate(MONOMIALS)}
_FACT = np.array([factorial(i) * factorial(j) for i, j in MONOMIALS], dtype=float)


def _pairs(order):
    out = []
    for k in range(SIZE[order]):
        ki, kj = MONOMIALS[k]
        for i in range(SIZE[order]):
            ii, ij = MONOMIALS[i]
            if ii <= ki and ij <= kj:
                out.append((k, i, _INDEX[(ki - ii, kj - ij)]))
    return out


_PAIRS = {k: _pairs(k) for k in range(MAX_ORDER + 1)}


def _mul_matrix(order):
    n = SIZE[order]
    m = np.zeros((n, n * n))
    for k, i, j in _PAIRS[order]:
        m[k, i * n + j] = 1.0
    return m


_MULMAT = {k: _mul_matrix(k) for k in range(MAX_ORDER + 1)}


def _deriv_map(order, axis):
    """Source indices and factors for d/dx (axis 0) or d/dy (axis 1)."""
    src, fac = [], []
    for i, j in MONOMIALS[: SIZE[order - 1]]:
        if axis == 0:
            src.append(_INDEX[(i + 1, j)])
            fac.append(i + 1)
        else:
            src.append(_INDEX[(i, j + 1)])
            fac.append(j + 1)
    return np.array(src), np.array(fac, dtype=float)


_DERIV = {(k, a): _deriv_map(k, a) for k in range(1, MAX_ORDER + 1) for a in (0, 1)}


def _multiply(a, b, order):
    n = SIZE[order]
    a = a[:n]
    b = b[:n]
    if a.ndim == 1 and b.ndim == 1:
        return _MULMAT[order] @ np.outer(a, b).ravel()
    shape = (n,) + np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros(shape, dtype=np.result_type(a, b))
    for k, i, j in _PAIRS[order]:
        out[k] += a[i] * b[j]
    return out


class Jet:
    """Order-``k`` Taylor jet of a scalar in two variables.

    Parameters
    ----------
    coeffs : array_like, shape (SIZE[order], *batch)
        Taylor coefficients in the monomial order of :data:`MONOMIALS`.
    order : int
        Truncation order, 0 to 3.
    """

    __slots__ = ("c", "order")
    __array_priority__ = 100

    def __init__(self, coeffs, order=MAX_ORDER):
        c = np.asarray(coeffs, dtype=float)
        if c.shape[0] < SIZE[order]:
            raise ValueError("too few coefficients for the requested order")
        self.c = c[: SIZE[order]]
        self.order = order

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, value, order=MAX_ORDER):
        value = np.asarray(value, dtype=float)
        c = np.zeros((SIZE[order],) + value.shape)
        c[0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, axis, order=MAX_ORDER):
        """Jet of the coordinate function ``u^(axis+1)`` at ``value``."""
        value = np.asarray(value, dtype=float)
        c = np.zeros((SIZE[order],) + value.shape)
        c[0] = value
        if order >= 1:
            c[1 + axis] = 1.0
        return cls(c, order)

    @classmethod
    def from_derivatives(cls, derivs, order=MAX_ORDER):
        d = np.asarray(derivs, dtype=float)
        n = SIZE[order]
        f = _FACT[:n].reshape((n,) + (1,) * (d.ndim - 1))
        return cls(d[:n] / f, order)

    # access ---------------------------------------------------------------
    @property
    def value(self):
        return self.c[0]

    @property
    def batch_shape(self):
        return self.c.shape[1:]

    def derivatives(self):
        """Partial derivatives in monomial order: f, f1, f2, f11, f12, f22, ..."""
        n = SIZE[self.order]
        f = _FACT[:n].reshape((n,) + (1,) * (self.c.ndim - 1))
        return self.c * f

    def partial(self, i, j):
        """The partial derivative d^(i+j) f / dx^i dy^j at the base point."""
        if i + j > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative ({i},{j})")
        n = _INDEX[(i, j)]
        return self.c[n] * _FACT[n]

    def d(self, axis):
        """Jet of the partial derivative along ``axis`` (order drops by one)."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = _DERIV[(self.order, axis)]
        f = fac.reshape((len(fac),) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[src] * f, self.order - 1)

    def truncate(self, order):
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        return Jet(self.c[: SIZE[order]], order)

    def all_finite(self):
        return bool(np.all(np.isfinite(self.c)))

    def __repr__(self):
        return f"Jet(order={self.order}, value={self.c[0]!r})"

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            n = SIZE[k]
            return Jet(self.c[:n] + other.c[:n], k)
        c = self.c.copy() if np.ndim(other) == 0 else self.c + np.zeros_like(other, dtype=float)
        c[0] = c[0] + other
        return Jet(c, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return Jet(_multiply(self.c, other.c, k), k)
        return Jet(self.c * np.asarray(other, dtype=float), self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise DomainError("division by zero")
        return Jet(self.c / other, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Jet.constant(np.ones(self.batch_shape), self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def compose(self, derivs):
        """Jet of ``g(self)`` given ``[g(f0), g'(f0), g''(f0), g'''(f0)]``."""
        delta = Jet(self.c.copy(), self.order)
        delta.c[0] = 0.0
        out = Jet.constant(derivs[0], self.order) + 0.0 * delta
        power = None
        for k in range(1, self.order + 1):
            power = delta if power is None else power * delta
            out = out + power * (np.asarray(derivs[k], dtype=float) / factorial(k))
        return out

    def reciprocal(self):
        f0 = self.c[0]
        if np.any(f0 == 0):
            raise DomainError("division by zero")
        r = 1.0 / f0
        return self.compose([r, -r * r, 2 * r**3, -6 * r**4])

    def exp(self):
        e = np.exp(self.c[0])
        return self.compose([e, e, e, e])

    def log(self):
        f0 = self.c[0]
        if np.any(f0 <= 0):
            raise DomainError("ln of a non-positive value")
        r = 1.0 / f0
        return self.compose([np.log(f0), r, -r * r, 2 * r**3])

    def sqrt(self):
        f0 = self.c[0]
        if np.any(f0 <= 0):
            raise DomainError("sqrt of a non-positive value")
        s = np.sqrt(f0)
        return self.compose([s, 0.5 / s, -0.25 / s**3, 0.375 / s**5])

    def sin(self):
        s, c = np.sin(self.c[0]), np.cos(self.c[0])
        return self.compose([s, c, -s, -c])

    def cos(self):
        s, c = np.sin(self.c[0]), np.cos(self.c[0])
        return self.compose([c, -s, -c, s])

    def arctan(self):
        q = self.c[0]
        r = 1.0 / (1.0 + q * q)
        return self.compose([np.arctan(q), r, -2 * q * r**2, (6 * q * q - 2) * r**3])


def atan2(u, v):
    """Jet of the two-argument arctangent ``atan2(u, v)``."""
    u0, v0 = u.c[0], v.c[0]
    r2 = u0 * u0 + v0 * v0
    if np.any(r2 == 0):
        raise DomainError("atan2(0, 0) is undefined")
    # tan(theta - theta0) = (u v0 - v u0) / (v v0 + u u0) vanishes at the base point
    q = (u * v0 - v * u0) / (v * v0 + u * u0)
    return q.arctan() + np.arctan2(u0, v0)
