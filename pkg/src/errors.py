"""Exception types shared by the library and the command-line front end."""

from __future__ import annotations


class QvtError(Exception):
    """Base class for every error raised on purpose by this package."""


class UsageError(QvtError):
    """Invalid combination of user-facing options."""


class DataError(QvtError, ValueError):
    """Malformed input data (circuit files, experiment records, matrices)."""


class NumericError(QvtError, ArithmeticError):
    """A numerical procedure failed to converge or to bracket a solution."""


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


def exit_code_for(exc: BaseException) -> int:
    """Map an exception onto the documented CLI exit codes."""
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, ArithmeticError):
        return EXIT_NUMERIC
    # DataError, ValueError, OSError and anything unexpected
    return EXIT_DATA
