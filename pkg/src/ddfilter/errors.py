"""Exception and warning types shared across the package."""


class FilterLearnError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(FilterLearnError, ValueError):
    """Array shapes are inconsistent with each other or with a filter."""


class EmptyClassError(FilterLearnError, ValueError):
    """A task has zero samples in one of its two classes."""


class ZeroDirectionError(FilterLearnError, ValueError):
    """A projection direction of all zeros was supplied."""


class SingularWithinError(FilterLearnError, ArithmeticError):
    """The regularized within-class scatter is numerically singular."""


class NonFiniteError(FilterLearnError, ArithmeticError):
    """An objective or gradient evaluation produced a non-finite value."""


class EmptyPairsError(FilterLearnError, ValueError):
    """A forced-choice evaluation was given no pairs to score."""


class InvalidCorrelationError(FilterLearnError, ValueError):
    """A target label correlation outside [-1, 1] was requested."""


class SingularSystemError(FilterLearnError, ArithmeticError):
    """An unregularized reconstruction fit has no unique minimizer."""


class IndexOutOfRangeError(FilterLearnError, IndexError):
    """A filter parameter index is outside the parameter vector."""


class FormatError(FilterLearnError, ValueError):
    """A data file does not conform to its declared format."""


class UsageError(FilterLearnError, ValueError):
    """Invalid command-line arguments or inconsistent inputs."""


class DegenerateMeansWarning(UserWarning):
    """The two class means coincide; the optimal discriminant is zero."""


class LineSearchWarning(UserWarning):
    """Backtracking found no step satisfying the sufficient-decrease test."""


class EpsilonFloorWarning(UserWarning):
    """A discriminability value fell below the floor inside the log ratio."""
