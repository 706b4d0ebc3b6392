"""Exception types shared across the package."""


class TokenPruneError(Exception):
    """Base class for all library errors."""


class ConfigError(TokenPruneError):
    """A configuration value violates its documented constraint."""


class ShapeError(TokenPruneError):
    """Array dimensions disagree with the bound grid or with each other."""


class DataError(TokenPruneError):
    """Input values are outside the valid domain (non-finite, empty, ...)."""


class FormatError(TokenPruneError):
    """A file does not conform to its on-disk format.

    ``offset`` is the byte position where parsing failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
