"""Exception types shared across the package."""


class PeerlearnError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(PeerlearnError, ValueError):
    """A config value or combination of values is invalid."""


class ShapeError(PeerlearnError, ValueError):
    """Array dimensions do not match what an operation requires."""


class LabelError(PeerlearnError, ValueError):
    """A class label is outside the valid range."""


class MissingClassError(PeerlearnError, ValueError):
    """A requested class has no members in the given set."""


class ParseError(PeerlearnError, ValueError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
