"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: usage problems exit 2
(argparse), ``DataError`` and I/O problems exit 3, ``TrainingDivergedError``
exits 4.
"""


class AbenchError(Exception):
    """Base class for all package errors."""


class DataError(AbenchError):
    """Invalid data: bad shapes, malformed files, out-of-range parameters."""


class RangeError(DataError):
    """A parameter lies outside its documented valid range."""


class ShapeError(DataError):
    """Array dimensions are inconsistent with the operation's contract."""


class DegenerateImageError(DataError):
    """An image is degenerate for the requested operation (all zero, zero std)."""


class DegenerateProfileError(DataError):
    """A delay profile has no well-defined autocorrelation width."""


class TransformError(DataError):
    """A data-domain transform could not be fitted or applied."""


class TrainingDivergedError(AbenchError):
    """Optimization produced a non-finite loss."""
