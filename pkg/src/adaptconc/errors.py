"""Exception types shared across the package."""


class AdaptconcError(Exception):
    """Base class for package errors."""


class DomainError(AdaptconcError, ValueError):
    """Parameters fall outside the domain where an inequality is defined."""


class UsageError(AdaptconcError, ValueError):
    """Malformed or missing input."""


class UnsupportedError(AdaptconcError, NotImplementedError):
    """Valid request that this package deliberately does not cover."""
