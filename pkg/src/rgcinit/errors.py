"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 1 usage, 2 data/format,
3 numerical.
"""
from __future__ import annotations


class RgcError(Exception):
    exit_code = 1


class UsageError(RgcError, ValueError):
    exit_code = 1


class DataError(RgcError, ValueError):
    """Malformed, inconsistent or out-of-contract input data."""

    exit_code = 2


class FormatError(DataError):
    pass


class LengthError(FormatError):
    pass


class ValidationError(DataError):
    pass


class ShapeError(DataError):
    pass


class EmptyClassError(DataError):
    def __init__(self, class_index: int, message: str | None = None):
        self.class_index = class_index
        super().__init__(message or f"class {class_index} has no samples")


class NumericalError(RgcError, ArithmeticError):
    exit_code = 3


class NotPositiveDefinite(NumericalError):
    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


class ConvergenceError(NumericalError):
    pass


class DegenerateWeights(NumericalError):
    pass


class DivergedError(NumericalError):
    def __init__(self, iteration: int, learning_rate: float):
        self.iteration = iteration
        self.learning_rate = learning_rate
        super().__init__(
            f"training diverged at iteration {iteration} (learning_rate={learning_rate!r})"
        )
