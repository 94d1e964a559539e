"""Exception and warning types raised across the package."""


class PricingError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(PricingError, ValueError):
    pass


class NonPositiveGain(PricingError, ValueError):
    pass


class BadDiagonal(PricingError, ValueError):
    pass


class TooLarge(PricingError, ValueError):
    """Raised when an exhaustive routine is asked to handle too many APs."""


class RayTermination(PricingError, ArithmeticError):
    """Lemke's pivot path left the feasible region without reaching a solution."""


class MaxPivots(PricingError, ArithmeticError):
    pass


class BadPriceOrder(PricingError, ValueError):
    pass


class HypothesisViolated(PricingError, ValueError):
    """A closed form was requested outside the regime in which it is valid."""


class DegenerateDuopoly(PricingError, ArithmeticError):
    """Duopoly welfare or profit is zero, so an efficiency ratio is undefined."""


class BoundViolated(PricingError, AssertionError):
    pass


class ConfigError(PricingError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(ConfigError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class EmptyTable(PricingError, ValueError):
    pass


class GainFloorWarning(UserWarning):
    """Zero or tiny interference gains were raised to the positive floor."""


class NoImprovement(UserWarning):
    """A numeric best response found zero profit at every candidate price."""
