"""Shared exception types.

ValidationError / ParseError signal bad user input (CLI exit code 1),
ConsistencyError signals a broken internal invariant (CLI exit code 2).
"""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class ParseError(ValidationError):
    """A data file could not be parsed.  Carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)


class DuplicateColumnError(ValidationError):
    """A column identical to one already in the master pool was offered."""


class ConsistencyError(RuntimeError):
    """An internal cross-check failed; results cannot be trusted."""
