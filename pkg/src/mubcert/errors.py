"""Exception hierarchy shared by all modules."""


class MubcertError(ValueError):
    pass


class NotHermitian(MubcertError):
    pass


class NotPsd(MubcertError):
    pass


class NotComplete(MubcertError):
    pass


class DimMismatch(MubcertError):
    pass


class InvalidDim(MubcertError):
    pass


class EtaOutOfRange(MubcertError):
    pass


class DegenerateSample(MubcertError):
    pass


class InvalidParams(MubcertError):
    pass


class NotADistribution(MubcertError):
    pass


class OutOfRange(MubcertError):
    pass


class NontrivialRegionRequired(MubcertError):
    pass


class DegenerateDenominator(MubcertError):
    pass


class ParseError(MubcertError):
    pass


class UnknownSuite(MubcertError):
    pass


class UncertaintyViolation(MubcertError):
    pass
