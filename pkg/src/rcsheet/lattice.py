"""Discrete graphene bookkeeping: Bravais vectors, sublattices, Burgers vectors and ring counts."""

from dataclasses import dataclass
from enum import Enum
from operator import index

import numpy as np

__all__ = [
    "DEFAULT_BOND",
    "DiscreteBurgers",
    "LatticeModel",
    "Sublattice",
    "burgers",
    "position",
    "stone_wales_change",
    "stone_wales_counts",
]

DEFAULT_BOND = 1.42
"""Nearest-neighbour carbon distance in angstrom."""


class Sublattice(Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class DiscreteBurgers:
    """Lattice translation ``b = m a1 + n a2`` in angstrom."""

    m: int
    n: int
    vector: np.ndarray
    strength: float


@dataclass(frozen=True)
class LatticeModel:
    """Hexagonal lattice with nearest-neighbour distance ``d`` (angstrom).

    The lattice constant is ``a = sqrt(3) d`` with basis
    ``a1 = (a/2, sqrt(3) a/2)`` and ``a2 = (-a/2, sqrt(3) a/2)``;
    sublattice B is shifted by ``delta = (a1 + a2) / 3``.
    """

    d: float = DEFAULT_BOND

    def __post_init__(self):
        if not (np.isfinite(self.d) and self.d > 0):
            raise ValueError("bond length must be positive")

    @property
    def a(self):
        return np.sqrt(3.0) * self.d

    @property
    def a1(self):
        return np.array([self.a / 2, np.sqrt(3.0) * self.a / 2])

    @property
    def a2(self):
        return np.array([-self.a / 2, np.sqrt(3.0) * self.a / 2])

    @property
    def delta(self):
        return (self.a1 + self.a2) / 3

    @property
    def gram(self):
        """Gram matrix of ``(a1, a2)``; ``a1 . a2 = a^2 / 2``."""
        a2 = self.a**2
        return np.array([[a2, a2 / 2], [a2 / 2, a2]])

    def position(self, m, n, sublattice="A"):
        m, n = index(m), index(n)
        r = m * self.a1 + n * self.a2
        if Sublattice(sublattice) is Sublattice.B:
            r = r + self.delta
        return r

    def burgers(self, m, n):
        m, n = index(m), index(n)
        if m == 0 and n == 0:
            raise ValueError("Burgers vector must be nonzero")
        b = m * self.a1 + n * self.a2
        return DiscreteBurgers(m, n, b, float(np.hypot(b[0], b[1])))

    def strength_gram(self, m, n):
        """``|m a1 + n a2|`` from the Gram matrix."""
        c = np.array([index(m), index(n)], dtype=float)
        return float(np.sqrt(c @ self.gram @ c))


def position(m, n, sublattice="A", d=DEFAULT_BOND):
    """Atom position ``r_A = m a1 + n a2`` or ``r_B = r_A + delta`` in angstrom."""
    return LatticeModel(d).position(m, n, sublattice)


def burgers(m, n, d=DEFAULT_BOND):
    """Proper Burgers vector ``m a1 + n a2`` and its Euclidean strength.

    Raises
    ------
    ValueError
        If ``(m, n) = (0, 0)``.
    """
    return LatticeModel(d).burgers(m, n)


def stone_wales_counts(p, q, r, s):
    """Atom and bond counts ``(v, c)`` of four rings sharing a rotated bond.

    ``v = p + q + r + s - 8`` and ``c = v + 3``. Ring sizes are integers ``>= 3``.
    """
    rings = [index(k) for k in (p, q, r, s)]
    if min(rings) < 3:
        raise ValueError("ring sizes must be polygons (>= 3)")
    v = sum(rings) - 8
    return v, v + 3


def stone_wales_change(p, q, r, s):
    """Ring sizes after the bond rotation ``(p-1, q+1, r-1, s+1)``."""
    return p - 1, q + 1, r - 1, s + 1
