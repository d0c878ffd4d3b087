"""Exception hierarchy shared by the library and the CLI."""


class MNSDPError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(MNSDPError, ValueError):
    """Invalid argument to a library call (bad sizes, indices, ranges)."""


class FormatError(MNSDPError):
    """A file does not follow its schema.

    ``field`` names the offending key when one can be identified.
    """

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class UnsatisfiableError(MNSDPError):
    """No feasible topology exists (or none was found where one is required)."""


class ConfigError(MNSDPError, ValueError):
    """Inconsistent solver configuration."""
