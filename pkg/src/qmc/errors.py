"""Exception and warning types shared across the package."""


class QMCError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(QMCError, ValueError):
    """Raised when an argument has an invalid value or is missing data."""


class DimensionError(ArgumentError):
    """Raised when matrix or subspace sizes do not match."""


class PoleError(QMCError, ArithmeticError):
    """Raised when an evaluation point sits on a pole."""


class PoleCollisionError(PoleError):
    """Raised when a relocated pole coincides with an existing one."""


class DivergenceError(QMCError, ArithmeticError):
    """Raised when a series or bilateral sum fails to converge."""


class SingularStepError(QMCError, ArithmeticError):
    """Raised when a backward q-step meets a singular coefficient matrix."""


class NotInvariantError(QMCError, ArithmeticError):
    """Raised when a subspace is not invariant under a matrix."""


class DegenerateError(ArgumentError):
    """Raised when parameters collapse a construction (e.g. equal poles)."""


class NonGenericParameterError(QMCError):
    """Raised when kernel dimensions differ from the expected generic counts."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class StarViolation(QMCError):
    """Raised when a tuple fails one of the nondegeneracy conditions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IsomorphismFailure(QMCError):
    """Raised when an expected intertwining relation does not hold."""

    def __init__(self, message, index=None, residual=None):
        super().__init__(message)
        self.index = index
        self.residual = residual


class NonGenericSpectrum(UserWarning):
    """Warning for eigenvalue clusters that are too close to separate reliably."""
