"""Holomorphic maps represented by the real and imaginary part fields."""

import numpy as np

from ..errors import DomainError
from .fields import PLANE, ScalarField2, as_field, as_point, coordinate, cos, exp, intersect, sin

CR_RTOL = 1e-8


class HolomorphicField:
    """A holomorphic function ``w = u + i v`` of ``z = x + i y``.

    Parameters
    ----------
    re, im : ScalarField2 or str
        Real and imaginary parts.  They are trusted to be holomorphic only up
        to the Cauchy-Riemann check performed at each evaluation.
    name : str, optional
    """

    def __init__(self, re, im, name=None, domain=PLANE):
        self.re = as_field(re, domain)
        self.im = as_field(im, domain)
        self.domain = intersect(self.re.domain, self.im.domain)
        self.name = name or f"({self.re}) + i({self.im})"

    def __repr__(self):
        return f"HolomorphicField({self.name})"

    # builtins -------------------------------------------------------------
    @classmethod
    def identity(cls, domain=PLANE):
        return cls(coordinate(0), coordinate(1), "identity", domain)

    @classmethod
    def exp(cls, domain=PLANE):
        x, y = coordinate(0), coordinate(1)
        return cls(exp(x) * cos(y), exp(x) * sin(y), "exp", domain)

    @classmethod
    def affine(cls, a, b=0.0, domain=PLANE):
        """``w = a z + b`` with complex ``a != 0``."""
        a, b = complex(a), complex(b)
        if a == 0:
            raise DomainError("affine map with a = 0 is constant")
        x, y = coordinate(0), coordinate(1)
        re = a.real * x - a.imag * y + b.real
        im = a.imag * x + a.real * y + b.imag
        return cls(re, im, f"affine({a}, {b})", domain)

    @classmethod
    def polynomial(cls, coeffs, domain=PLANE):
        """``w = sum_k coeffs[k] z^k`` (Horner form)."""
        coeffs = [complex(c) for c in coeffs]
        x, y = coordinate(0), coordinate(1)
        re, im = as_field(coeffs[-1].real), as_field(coeffs[-1].imag)
        for c in reversed(coeffs[:-1]):
            re, im = re * x - im * y + c.real, re * y + im * x + c.imag
        return cls(re, im, f"poly{tuple(coeffs)}", domain)

    @classmethod
    def from_spec(cls, text, domain=PLANE):
        """Builtin name (``identity``, ``exp``, ``affine(a, b)``) or ``"re; im"``."""
        t = text.strip()
        if t == "identity":
            return cls.identity(domain)
        if t == "exp":
            return cls.exp(domain)
        if t.startswith("affine(") and t.endswith(")"):
            parts = [p.strip().replace(" ", "") for p in t[7:-1].split(",")]
            if len(parts) not in (1, 2):
                raise ValueError("affine takes one or two complex arguments")
            a = complex(parts[0].replace("i", "j"))
            b = complex(parts[1].replace("i", "j")) if len(parts) == 2 else 0.0
            return cls.affine(a, b, domain)
        if ";" in t:
            re, im = t.split(";", 1)
            return cls(re.strip(), im.strip(), None, domain)
        raise ValueError(f"unrecognised holomorphic map {text!r}")

    # derived fields -------------------------------------------------------
    def derivative_fields(self):
        """Fields of Re w' and Im w' (``w' = u_x + i v_x``)."""
        return self.re.diff(0), self.im.diff(0)

    def modulus_sq_derivative(self):
        """Field of ``|w'|^2``."""
        ux, vx = self.derivative_fields()
        return ux * ux + vx * vx


def eval_holomorphic(w, z, check_cr=True):
    """Value, first and second complex derivative of ``w`` at ``z``.

    Raises
    ------
    DomainError
        If ``z`` is outside the domain, ``w'(z) = 0``, or the underlying
        real pair violates the Cauchy-Riemann equations.
    """
    p = as_point(np.asarray(z, dtype=complex))
    ju, jv = w.re.jet(p, 2), w.im.jet(p, 2)
    u, v = ju.derivatives(), jv.derivatives()
    # monomial order: f, f1, f2, f11, f12, f22
    val = u[0] + 1j * v[0]
    d1 = u[1] + 1j * v[1]
    d2 = u[3] + 1j * v[3]
    if check_cr:
        scale = 1.0 + np.abs(d1)
        cr = np.maximum(np.abs(u[1] - v[2]), np.abs(u[2] + v[1]))
        if np.any(cr > CR_RTOL * scale):
            raise DomainError(f"{w.name} violates the Cauchy-Riemann equations")
    if np.any(np.abs(d1) == 0):
        raise DomainError(f"derivative of {w.name} vanishes")
    return val, d1, d2


def cauchy_riemann_residual(w, z):
    """Max of ``|u_x - v_y|`` and ``|u_y + v_x|`` at ``z``."""
    p = as_point(np.asarray(z, dtype=complex))
    u, v = w.re.jet(p, 1).derivatives(), w.im.jet(p, 1).derivatives()
    return np.maximum(np.abs(u[1] - v[2]), np.abs(u[2] + v[1]))


__all__ = ["HolomorphicField", "eval_holomorphic", "cauchy_riemann_residual", "ScalarField2"]
