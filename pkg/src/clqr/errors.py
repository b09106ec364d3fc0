"""Exception hierarchy shared by all clqr modules."""


class ClqrError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(ClqrError):
    pass


class NotStabilizable(ClqrError):
    pass


class NonConvergence(ClqrError):
    pass


class EmptyTerminalSet(ClqrError):
    pass


class NoFiniteDetermination(ClqrError):
    pass


class InvalidConstraintSet(ClqrError):
    pass


class StageOutOfRange(ClqrError):
    pass


class IndexOutOfRange(ClqrError):
    pass


class NumericalFailure(ClqrError):
    pass


class HorizonMismatch(ClqrError):
    pass


class RankDeficient(ClqrError):
    pass


class EmptyRegion(ClqrError):
    pass
