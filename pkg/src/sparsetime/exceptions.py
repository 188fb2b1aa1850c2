"""Domain-specific exceptions for sparsetime.

CLI exit codes follow the hierarchy: ConfigError → 1, DataError → 2,
NumericalError → 3.
"""

from __future__ import annotations


class SparseTimeError(Exception):
    """Base exception for all sparsetime errors."""


class ConfigError(SparseTimeError, ValueError):
    """Run configuration or CLI arguments rejected."""


class ShapeError(SparseTimeError, ValueError):
    """Operand shapes are inconsistent."""


class DataError(SparseTimeError, ValueError):
    """Input data cannot be ingested or windowed."""


class DataFileNotFoundError(DataError):
    """CSV file does not exist."""


class MissingColumnError(DataError):
    """A requested column is absent from the CSV header."""


class EmptyDataError(DataError):
    """The input has no usable rows."""


class MalformedCsvError(DataError):
    """The CSV is not well-formed (ragged rows, invalid encoding)."""


class NumericalError(SparseTimeError, ArithmeticError):
    """Non-finite values or a numerical routine failed."""


class SvdConvergenceError(NumericalError):
    """Truncated SVD did not converge."""


class NonFiniteGradientError(NumericalError):
    """A gradient tensor contains NaN or Inf."""


EXIT_CODES: dict[type[SparseTimeError], int] = {
    ConfigError: 1,
    DataError: 2,
    ShapeError: 2,
    NumericalError: 3,
}


def exit_code_for(exc: BaseException) -> int:
    for exc_type, code in EXIT_CODES.items():
        if isinstance(exc, exc_type):
            return code
    return 1
