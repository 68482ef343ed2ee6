"""Exception hierarchy shared across the package."""


class OqMetroError(Exception):
    """Base class for all package errors."""


class NotHermitian(OqMetroError):
    pass


class NotPsd(OqMetroError):
    pass


class BlochNormExceeded(OqMetroError):
    pass


class DimensionMismatch(OqMetroError):
    pass


class OutcomeCountMismatch(OqMetroError):
    pass


class ParamOutOfRange(OqMetroError):
    pass


class NonRealValue(OqMetroError):
    pass


class NotNormalized(OqMetroError):
    pass


class DerivativeNotTraceless(OqMetroError):
    pass


class NegativeOq(OqMetroError):
    pass


class ZeroQfi(OqMetroError):
    pass


class ZeroInformation(OqMetroError):
    pass


class NegativeCounts(OqMetroError):
    pass


class FlatLikelihood(OqMetroError):
    pass


class ZeroSlope(OqMetroError):
    pass


class AllTrialsOmitted(OqMetroError):
    pass
