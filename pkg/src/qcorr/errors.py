"""Exception hierarchy shared by every module."""


class QCorrError(Exception):
    """Base class for all library errors."""


class DomainError(QCorrError, ValueError):
    """An argument lies outside the domain of the operation."""


class InsufficientData(QCorrError):
    """Too few observations fall inside a conditioning set."""


class DegenerateVariance(QCorrError):
    """A conditioned coordinate has (numerically) zero variance.

    ``column`` carries the offending column index when known.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class EmptyConditionError(QCorrError):
    """The conditioning set has zero probability under the model."""


class DataError(QCorrError):
    """Input data could not be turned into a usable sample."""


class IoError(QCorrError, OSError):
    """An input file could not be read or an output could not be written."""
