"""Jet-valued field calculus on two-dimensional charts."""

from .expr import parse as parse_expression
from .fields import (
    PLANE,
    Disk,
    GridSpec,
    Point2,
    Rect,
    ScalarField2,
    apply,
    as_field,
    as_point,
    atan2,
    constant,
    coordinate,
    cos,
    eval_jet,
    exp,
    ln,
    parse_field,
    sin,
    sqrt,
)
from .holomorphic import HolomorphicField, cauchy_riemann_residual, eval_holomorphic
from .jet import MONOMIALS, Jet
from .oracle import fd_oracle, fd_richardson

X = coordinate(0)
Y = coordinate(1)

__all__ = [
    "Disk",
    "GridSpec",
    "HolomorphicField",
    "Jet",
    "MONOMIALS",
    "PLANE",
    "Point2",
    "Rect",
    "ScalarField2",
    "X",
    "Y",
    "apply",
    "as_field",
    "as_point",
    "atan2",
    "cauchy_riemann_residual",
    "constant",
    "coordinate",
    "cos",
    "eval_holomorphic",
    "eval_jet",
    "exp",
    "fd_oracle",
    "fd_richardson",
    "ln",
    "parse_expression",
    "parse_field",
    "sin",
    "sqrt",
]
