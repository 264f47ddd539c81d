class FockDecoyError(Exception):
    """Base class for all package errors."""


class ConfigError(FockDecoyError, ValueError):
    pass


class OutOfRange(FockDecoyError, ValueError):
    """Observed rate cannot be produced by any channel efficiency in [0, 1]."""


class InsufficientData(FockDecoyError):
    """A herald tag has no pulses, so no estimate is possible."""


class NonConvergence(FockDecoyError):
    pass


class NotUnimodal(FockDecoyError):
    """Grid pre-scan found more than one local maximum."""
