"""Exception hierarchy shared by every module."""


class RisError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RisError, ValueError):
    """A parameter is outside its physical or mathematical domain."""


class SingularityError(RisError, ZeroDivisionError):
    """A denominator vanished (impedance or coefficient mapping)."""


class DegenerateChannelError(RisError, ValueError):
    """A channel needed for normalization or a closed form is (numerically) zero."""


class InfeasibleError(RisError):
    """The power budget leaves nothing for amplification."""


class ConvergenceError(RisError):
    """An iterative solver hit its iteration limit."""


class ConfigError(RisError):
    """A scenario configuration document is malformed."""
