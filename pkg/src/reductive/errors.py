"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class ReductionError(ValueError):
    """Base class for all errors raised while building or fitting a reduction."""


class NotSymmetricError(ReductionError):
    """A matrix that must be symmetric is not (within tolerance)."""


class RankDeficiencyError(ReductionError):
    """A matrix that must be positive definite is singular or nearly so."""

    def __init__(self, message: str, eigenvalue: float | None = None) -> None:
        super().__init__(message)
        self.eigenvalue = eigenvalue


class DegenerateBasisError(ReductionError):
    """The response cannot support the requested basis (constant, empty slices, ...)."""


class DimensionMismatchError(ReductionError):
    """Shapes of two operands are incompatible."""


class InsufficientDataError(ReductionError):
    """Too few observations for the requested fit."""


class FitError(ReductionError):
    """A fitting procedure could not produce an estimate."""


class DataFormatError(ReductionError):
    """Malformed input data (non-numeric cells, missing columns, non-binary entries)."""

    def __init__(self, message: str, column: str | None = None, row: int | None = None) -> None:
        super().__init__(message)
        self.column = column
        self.row = row
