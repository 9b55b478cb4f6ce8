"""Exception types shared across the package."""


class FairpriceError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FairpriceError, ValueError):
    """Invalid input: bad parameter range, malformed spec, unknown id."""


class ResourceCapError(FairpriceError):
    """A configured size/step cap was exceeded (player count, DP horizon)."""
