"""Exception hierarchy shared by every heightlab module."""


class HeightlabError(Exception):
    """Base class for all library errors."""


class PrecisionExhausted(HeightlabError):
    pass


class RamifiedUnsupported(HeightlabError):
    pass


class SingularCurve(HeightlabError):
    pass


class BadReductionUnsupported(HeightlabError):
    pass


class WrongReductionType(HeightlabError):
    pass


class FieldTooSmall(HeightlabError):
    pass


class InertOrRamifiedPrime(HeightlabError):
    pass


class BudgetExceeded(HeightlabError):
    pass


class CoordinateBlowup(BudgetExceeded):
    pass


class DuplicatePoints(HeightlabError):
    pass


class InvalidPlace(HeightlabError):
    pass


class NoAdmissiblePrime(HeightlabError):
    pass


class InsufficientOrbit(HeightlabError):
    pass


class TorsionInput(HeightlabError):
    pass


class Inconclusive(HeightlabError):
    pass


class PreconditionError(HeightlabError, ValueError):
    pass


class CorpusError(HeightlabError, ValueError):
    """A corpus entry failed to parse or validate; the message names it."""
