"""Shared exception hierarchy so callers (and the CLI) can map failures uniformly."""


class RuleformError(Exception):
    """Base class for all input, model and evaluation errors raised by this package."""


class SourceError(RuleformError):
    """An error tied to a position in an input file."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"line {line}, column {column}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
