"""Exception hierarchy shared across the package.

The CLI maps each family onto its own exit status, so callers that need to
tell a bad config apart from bad data or a numerical failure can catch the
base classes below.
"""

from __future__ import annotations


class PlscastError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(PlscastError, ValueError):
    """Invalid configuration or parameter combination."""


class DataError(PlscastError, ValueError):
    """Input data cannot be used as given."""


class ParseError(DataError):
    """Malformed cell in a CSV input, located by row and column."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.row = row
        self.column = column


class GapError(DataError):
    """Missing observation(s) inside the span a series must cover."""

    def __init__(self, message: str, series: str | None = None, period: str | None = None):
        super().__init__(message)
        self.series = series
        self.period = period


class AlignmentError(DataError):
    """Series do not share a compatible quarterly calendar."""

    def __init__(self, message: str, series: str | None = None):
        super().__init__(message)
        self.series = series


class NumericalError(PlscastError):
    """Base for failures of a numerical routine."""


class DomainError(NumericalError, ValueError):
    """Argument outside the domain of the operation."""


class SingularMatrixError(DomainError):
    """Design matrix is (numerically) rank deficient.

    ``column`` is the index of the first column found to be linearly
    dependent on the columns before it, or ``None`` when not detectable.
    """

    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


class ConvergenceError(NumericalError, ArithmeticError):
    """Iterative solver hit its iteration cap."""

    def __init__(self, message: str, last_delta: float):
        super().__init__(message)
        self.last_delta = last_delta
