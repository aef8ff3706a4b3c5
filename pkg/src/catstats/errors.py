"""Exception types shared across the package."""


class CatstatsError(Exception):
    """Base class for every error raised by this package."""


class InputError(CatstatsError, ValueError):
    """An argument or dataset fails a precondition."""


class ParseError(InputError):
    """A data file is malformed; remembers the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConvergenceError(CatstatsError):
    """An iterative numerical scheme did not reach the requested tolerance."""


class EvaluationError(CatstatsError):
    """Every available evaluation method failed; message carries diagnostics."""


class DegenerateTableError(CatstatsError):
    """The table carries no usable variation for the requested test."""


class DegenerateNullError(CatstatsError):
    """The null distribution puts all mass on a single category."""
