"""Exception types shared by all modules."""


class RcsheetError(Exception):
    """Base class for errors raised by this package."""


class ParseError(RcsheetError, ValueError):
    """Malformed field expression.

    Attributes
    ----------
    position : int
        Zero-based character offset of the offending token.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DomainError(RcsheetError, ValueError):
    """Point outside a field's domain, or an argument outside a function's domain."""


class NonFiniteError(RcsheetError, FloatingPointError):
    """A jet acquired a NaN or infinite entry."""


class SingularMetricError(RcsheetError, ArithmeticError):
    """Metric not positive definite (det a <= 1e-14)."""


class DegenerateFrameError(RcsheetError, ArithmeticError):
    """Frame with vanishing determinant."""


class ConstraintError(RcsheetError, ValueError):
    """Input violates a stated constraint (branch condition, sign rule, orthonormality)."""


class ConvergenceError(RcsheetError, RuntimeError):
    """Iterative solver exhausted its budget."""
