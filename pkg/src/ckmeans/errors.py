"""Exception types raised by ckmeans."""


class DimensionError(ValueError):
    """Raised when a vector or matrix has the wrong length or shape."""


class ValidationError(ValueError):
    """Raised when inputs violate a hard constraint (index range, sums, ...)."""


class IngestionError(ValueError):
    """Raised when an input file cannot be parsed.

    Attributes:
        line: 1-based line number of the offending line, or None.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class OracleSizeError(ValueError):
    """Raised when an instance is too large to enumerate exhaustively."""
