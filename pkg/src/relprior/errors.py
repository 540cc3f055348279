"""Exception hierarchy.

Each class maps onto one CLI exit code, so library callers and the command
line agree on what went wrong.
"""


class RelpriorError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 1


class DataError(RelpriorError, ValueError):
    """Malformed or unusable input data."""

    exit_code = 2


class NumericalError(RelpriorError, ArithmeticError):
    """An optimizer, root finder or quadrature routine failed."""

    exit_code = 3


class GuardError(RelpriorError):
    """A statistical guard refused the request (e.g. improper posterior)."""

    exit_code = 4


class ConfigError(RelpriorError, ValueError):
    """Invalid run configuration."""

    exit_code = 5
