"""Exception types raised across smoothlab."""


class SmoothLabError(Exception):
    """Base class for all package errors."""


class OutOfDomain(SmoothLabError, ValueError):
    pass


class NonZeroMean(SmoothLabError, ValueError):
    pass


class BadEpsilon(SmoothLabError, ValueError):
    pass


class NonConvergent(SmoothLabError, RuntimeError):
    pass


class DegenerateInterval(SmoothLabError, ValueError):
    pass


class Diverging(SmoothLabError, ArithmeticError):
    """A dyadic integral or series whose terms stop decaying."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegreeExhausted(SmoothLabError, ValueError):
    pass


class GridTooLarge(SmoothLabError, ValueError):
    pass


class TooLarge(SmoothLabError, ValueError):
    pass


class NonPositiveData(SmoothLabError, ValueError):
    pass


class InsufficientSamples(SmoothLabError, ValueError):
    pass


class RecipeDiverged(SmoothLabError, RuntimeError):
    pass


class ConfigError(SmoothLabError, ValueError):
    pass
