"""Exception hierarchy.

``ValueError`` subclasses signal bad input (CLI exit code 1); everything
deriving from :class:`NumericalError` is a numerical failure (exit code 2).
"""


class SingdetError(Exception):
    """Base class for all package errors."""


class ParseError(SingdetError, ValueError):
    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at offset {position}")


class AdmissibilityError(SingdetError, ValueError):
    """Boundary pair not admissible for the given order."""


class NumericalError(SingdetError, RuntimeError):
    """A numerical invariant could not be established."""


class EvaluationError(NumericalError):
    """Potential evaluated to a non-finite value."""

    def __init__(self, message: str, x: float | None = None):
        self.x = x
        super().__init__(message)


class FrobeniusError(NumericalError):
    def __init__(self, message: str, bound: float | None = None):
        self.bound = bound
        super().__init__(message)


class IntegrationError(NumericalError):
    pass


class WronskianError(NumericalError):
    def __init__(self, message: str, deviation: float | None = None):
        self.deviation = deviation
        super().__init__(message)


class PoleError(NumericalError):
    """Operator (nearly) not invertible at the requested spectral parameter."""


class RegIntError(NumericalError):
    def __init__(self, message: str, exponent: float | None = None):
        self.exponent = exponent
        super().__init__(message)


class FitError(NumericalError):
    pass


class BesselOverflowError(SingdetError, OverflowError):
    """Result not representable; ``log_value`` carries log of the magnitude."""

    def __init__(self, message: str, log_value: float):
        self.log_value = log_value
        super().__init__(message)
