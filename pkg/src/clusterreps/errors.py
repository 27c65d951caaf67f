"""Exception hierarchy shared by loaders, algorithms and the command line."""


class ClusterRepsError(Exception):
    """Base class for every error raised on purpose by this package."""


class DataError(ClusterRepsError):
    """Input data is unusable (bad file contents, violated preconditions)."""


class ParseError(DataError, ValueError):
    """A file could not be parsed.  ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(ParseError):
    """A file parsed but its structure is wrong (e.g. non-square matrix)."""


class DomainError(DataError, ValueError):
    """An operation was called outside its mathematical domain."""


class ConfigError(ClusterRepsError, ValueError):
    """Invalid parameters or options."""
