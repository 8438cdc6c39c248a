"""Exception types shared across the package."""


class ContractError(ValueError):
    """An input violates a documented precondition or invariant."""


class TraceParseError(ValueError):
    """Malformed trace CSV; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
