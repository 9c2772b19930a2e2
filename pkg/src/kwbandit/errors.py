"""Exception types shared across the package."""


class KwbanditError(Exception):
    """Base class for all package errors."""


class DomainError(KwbanditError, ValueError):
    """An input lies outside the domain an operation is defined on."""


class ParameterError(KwbanditError, ValueError):
    """A tuning parameter is incompatible with the problem geometry."""


class ProtocolError(KwbanditError, RuntimeError):
    """act/update (or next_arm/record_payoff) were called out of order."""


class NumericError(KwbanditError, ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""


class EstimationError(NumericError):
    """Too few usable points to fit a regret exponent."""


class ConfigError(KwbanditError, ValueError):
    """An experiment configuration is malformed or inconsistent."""
