"""Exception hierarchy shared by all modules.

The CLI maps :class:`ConfigurationError` (and subclasses) to exit code 2.
"""


class HscompressError(Exception):
    """Base class for all package errors."""


class ConfigurationError(HscompressError):
    """Inconsistent or unusable group / construction configuration."""


class PreconditionError(HscompressError):
    """An operation was called with inputs violating its contract."""


class RadiusExceeded(HscompressError):
    """Breadth-first search hit the radius cap before reaching the target."""


class BallTooLarge(HscompressError):
    """A requested enumeration exceeds the configured size cap."""


class NotCND(HscompressError):
    """A Gram matrix has a materially negative eigenvalue."""
