"""Exception and warning types raised across the package."""


class BirthChainError(Exception):
    """Base class for all package errors."""


class DomainError(BirthChainError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class ResourceLimitError(BirthChainError):
    """A computation would exceed a configured exact-arithmetic ceiling."""

    def __init__(self, message, requested=None, limit=None):
        super().__init__(message)
        self.requested = requested
        self.limit = limit


class PrecisionExhausted(BirthChainError, ArithmeticError):
    """Floating-point evaluation lost more digits than the precision budget allows."""

    def __init__(self, message, cancellation_digits):
        super().__init__(message)
        self.cancellation_digits = cancellation_digits


class ToleranceNotMet(BirthChainError):
    """A numerical method could not certify its requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


class PrecisionWarning(UserWarning):
    """Emitted when a float evaluation is dominated by cancellation."""
