"""Exception types shared across the package."""


class QillumError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(QillumError, ValueError):
    """A physical or configuration parameter is out of its valid range."""


class InsufficientDataError(QillumError, ValueError):
    """An estimator received fewer samples than it needs."""


class DegenerateInputError(QillumError, ArithmeticError):
    """A quantity required by an estimator is undefined for this input
    (zero denominator, non-positive normally-ordered variance, ...)."""
