"""Exception types raised across the package."""


class ShortBlockError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ShortBlockError, ValueError):
    """A parameter or configuration value is out of its supported range."""


class DimensionError(ShortBlockError, ValueError):
    """Array lengths or shapes do not agree."""


class CapacityError(ShortBlockError, MemoryError):
    """The requested object would be too large to build."""


class RangeError(ShortBlockError, ValueError):
    """A requested quantity lies outside the range covered by the data."""

    def __init__(self, message, receiver=None):
        super().__init__(message)
        self.receiver = receiver
