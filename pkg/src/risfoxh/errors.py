"""Exception hierarchy shared by the numerical modules."""


class RisFoxHError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RisFoxHError, ValueError):
    """Argument outside the domain of a special function or transform."""


class ConfigurationError(RisFoxHError, ValueError):
    """Parameter set that cannot be evaluated as configured (e.g. no separating contour)."""


class AccuracyError(RisFoxHError, ArithmeticError):
    """Quadrature or series failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class UnsupportedDimensionError(RisFoxHError, ValueError):
    """Too many variables for exact evaluation; use Monte Carlo or asymptotics instead."""

    def __init__(self, message, recommendation="monte-carlo or asymptotic"):
        super().__init__(message)
        self.recommendation = recommendation


class DegenerateParameterError(RisFoxHError, ValueError):
    """A gamma factor in a closed form hits a pole for the given parameters."""


class UnsupportedScenarioError(RisFoxHError, ValueError):
    """Pole structure not covered by the closed-form coding gain."""


class InsufficientPrecisionError(RisFoxHError, ValueError):
    """Monte Carlo estimates too noisy for the requested fit; raise the sample count."""


class RareEventError(RisFoxHError, ValueError):
    """Too few outage events observed for a trustworthy Monte Carlo estimate."""
