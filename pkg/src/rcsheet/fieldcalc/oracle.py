"""Finite-difference cross-check for jets.

Independent of the jet arithmetic: only point values of the field are used.
Each partial derivative is a tensor product of one-dimensional five-point
central stencils.  The first and second derivative stencils are fourth
order, the third derivative stencil is second order; all three are exact on
polynomials of degree four, so cubic fields are reproduced up to rounding.
"""

import numpy as np

from ..errors import DomainError
from .fields import as_field, as_point, eval_jet
from .jet import MONOMIALS

_OFFSETS = np.arange(-2, 3)
_STENCIL = {
    0: np.array([0.0, 0.0, 1.0, 0.0, 0.0]),
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
    3: np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / 2.0,
}


def fd_oracle(f, p, h):
    """Central-difference estimates of all partial derivatives up to order 3.

    Parameters
    ----------
    f : ScalarField2 or str
    p : Point2 or tuple
    h : float
        Step; the 5 x 5 stencil spans ``[-2h, 2h]`` in each direction.

    Returns
    -------
    ndarray, shape (10, *batch)
        ``f, f1, f2, f11, f12, f22, f111, f112, f122, f222``.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    f = as_field(f)
    p = as_point(p)
    di, dj = np.meshgrid(_OFFSETS, _OFFSETS, indexing="ij")
    shape = (5, 5) + p.shape
    u1 = p.u1[None, None] + h * di.reshape((5, 5) + (1,) * p.u1.ndim)
    u2 = p.u2[None, None] + h * dj.reshape((5, 5) + (1,) * p.u2.ndim)
    u1, u2 = np.broadcast_to(u1, shape), np.broadcast_to(u2, shape)
    if not np.all(f.domain.contains(u1, u2)):
        raise DomainError("finite-difference stencil leaves the field domain")
    vals = eval_jet(f, (u1, u2), order=0).value
    out = []
    for i, j in MONOMIALS:
        w = np.outer(_STENCIL[i], _STENCIL[j]) / h ** (i + j)
        out.append(np.tensordot(w, vals, axes=([0, 1], [0, 1])))
    return np.array(out)


def fd_richardson(f, p, h):
    """One Richardson step on :func:`fd_oracle` with steps ``h`` and ``h/2``."""
    return (4.0 * fd_oracle(f, p, h / 2) - fd_oracle(f, p, h)) / 3.0
