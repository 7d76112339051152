"""Exception types shared across the package."""


class BesselMaxError(Exception):
    """Base class for all package errors."""


class DomainError(BesselMaxError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConvergenceError(BesselMaxError, ArithmeticError):
    """An iterative or truncated computation failed to meet its target."""


class ConsistencyError(BesselMaxError):
    """Two independent routes disagree beyond their error budgets."""
