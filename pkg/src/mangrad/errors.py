"""Exception types shared across the package."""


class MangradError(Exception):
    """Base class for all package errors."""


class UsageError(MangradError):
    """A caller violated an operation's preconditions."""


class ConfigError(UsageError):
    """An experiment configuration failed validation."""


class CapabilityError(UsageError):
    """The request exceeds the supported problem scale."""


class LawError(UsageError):
    """A direction law is invalid at the queried point."""


class UndefinedAngleError(UsageError):
    """The saddle angle is undefined because both coordinate blocks vanish."""


class NumericError(MangradError):
    """A numerical routine failed to meet its accuracy contract."""
