"""Exception types raised across the package."""


class KPlaneError(Exception):
    """Base class for all errors raised by kplane."""


class NonPrimeModulus(KPlaneError, ValueError):
    pass


class ZeroInverse(KPlaneError, ZeroDivisionError):
    pass


class IndexOutOfRange(KPlaneError, IndexError):
    pass


class InvalidDims(KPlaneError, ValueError):
    pass


class EmptyInput(KPlaneError, ValueError):
    pass


class MixedDimensions(KPlaneError, ValueError):
    pass


class InvalidExponent(KPlaneError, ValueError):
    pass


class ZeroFunction(KPlaneError, ValueError):
    pass


class WrongArity(KPlaneError, ValueError):
    pass


class TooLarge(KPlaneError, ValueError):
    """The requested exhaustive enumeration exceeds the tuple-space cap."""


class InvalidPivots(KPlaneError, ValueError):
    pass


class NoPromotionSlot(KPlaneError, ValueError):
    pass


class HypothesisViolated(KPlaneError, ValueError):
    pass


class NegativeValue(KPlaneError, ValueError):
    pass


class SupTooLarge(KPlaneError, ValueError):
    pass


class InsufficientData(KPlaneError, ValueError):
    pass
