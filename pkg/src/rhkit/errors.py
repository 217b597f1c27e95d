"""Exception hierarchy shared by all modules.

The CLI maps :class:`ParameterError` to exit status 1 and every
:class:`NumericError` subclass to exit status 2.
"""


class RhkitError(Exception):
    """Base class for library errors."""


class ParameterError(RhkitError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(ParameterError):
    """Argument at a pole or outside the function's domain."""


class NumericError(RhkitError, ArithmeticError):
    """A computation failed or could not meet its accuracy contract."""


class RangeError(NumericError):
    """Requested point lies outside the certified range of a solution."""

    def __init__(self, message: str, certified_limit: float | None = None):
        super().__init__(message)
        self.certified_limit = certified_limit


class ConvergenceError(NumericError):
    """Iteration or contour sum did not settle within tolerance."""
