"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2,
DataError -> 3, NumericError -> 4.
"""


class TechspaceError(Exception):
    """Base class for all package errors."""


class ValidationError(TechspaceError):
    """Bad configuration, schema, or argument."""


class DataError(TechspaceError):
    """Input data violates a contract (missing columns, empty year, ...)."""


class NumericError(TechspaceError):
    """A numeric computation cannot proceed (degenerate matrix, ...)."""
