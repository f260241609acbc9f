"""Exception hierarchy.

Input problems derive from ``DomainError`` (a ``ValueError``); failures of a
numerical procedure derive from ``NumericalError`` (an ``ArithmeticError``).
The command line maps the first family to exit status 2 and the second to 3.
"""


class ChaosExpError(Exception):
    """Base class for all package errors."""


class DomainError(ChaosExpError, ValueError):
    """An argument is outside the domain where a formula holds."""


class InvalidIndexError(DomainError):
    pass


class ShapeError(DomainError):
    pass


class InvalidCovarianceError(DomainError):
    pass


class DegenerateModelError(DomainError):
    pass


class CapabilityError(DomainError):
    """A request exceeds configured limits (order, dimension, missing data)."""


class NoSubsequenceError(DomainError):
    pass


class NumericalError(ChaosExpError, ArithmeticError):
    pass


class IllConditionedFitError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class FactorizationError(NumericalError):
    pass


class DegenerateLimitError(NumericalError):
    pass
