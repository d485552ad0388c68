"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI uses when the error
escapes a subcommand.
"""


class MlurnError(Exception):
    exit_code = 1


class InvalidInputError(MlurnError, ValueError):
    """Malformed profile, matrix, lottery or configuration."""

    exit_code = 2


class ProfileParseError(InvalidInputError):
    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ResourceLimitError(MlurnError):
    """A requested computation exceeds a configured size guard."""

    exit_code = 3


class ConvergenceError(MlurnError, RuntimeError):
    """An iterative numerical method failed to reach its tolerance."""

    exit_code = 4


class ReducibleChainError(InvalidInputError):
    """Stationary distribution requested for a chain with r = 0."""


class SimplexEscapeError(ConvergenceError):
    """An ODE step left the probability simplex even after step halving."""
