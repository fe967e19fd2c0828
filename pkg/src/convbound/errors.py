"""Exception hierarchy shared by every convbound module."""


class ConvboundError(Exception):
    """Base class for all errors raised by convbound."""


class ValidationError(ConvboundError, ValueError):
    """Input data violates a documented invariant."""


class ParseError(ValidationError):
    """Malformed input text; carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(ValidationError):
    """Invalid configuration (thresholds, GA settings, blend weights...)."""


class DegenerateDistributionError(ConvboundError, ArithmeticError):
    """A statistic is undefined because a marginal has zero variance."""
