"""Exception types raised across the package."""


class OnomaError(Exception):
    """Base class for package errors."""


class NonConvergence(OnomaError, ArithmeticError):
    """A truncated series did not settle within its term budget."""


class QuadratureFailure(OnomaError, ArithmeticError):
    """Numerical integration missed its tolerance."""


class EmptySample(OnomaError, ValueError):
    pass


class ConfigError(OnomaError):
    pass


class ParseError(ConfigError):
    """Scenario text could not be parsed."""


class ValidationError(ConfigError, ValueError):
    """Scenario parsed but holds out-of-range or unknown values."""


class MissingPair(OnomaError, KeyError):
    """A comparison point lacks one of the schemes being compared."""
