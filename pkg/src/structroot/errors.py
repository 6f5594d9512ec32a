"""Exception types raised by structroot."""


class RootFindingError(Exception):
    """Base class for all errors raised by this package."""


class ZeroConstantTerm(RootFindingError):
    pass


class LargeResidual(RootFindingError):
    def __init__(self, message, remainder=None):
        super().__init__(message)
        self.remainder = remainder


class ModulusMismatch(RootFindingError):
    pass


class AlgebraOverflow(RootFindingError):
    pass


class DimensionMismatch(RootFindingError):
    pass


class SingularMatrix(RootFindingError):
    pass


class SingularElement(SingularMatrix):
    """An algebra element whose matrix image is singular."""


class RankDeficient(RootFindingError):
    pass


class NoConvergence(RootFindingError):
    pass


class NoDominance(RootFindingError):
    pass


class Diverged(RootFindingError):
    pass


class AmbiguousCount(RootFindingError):
    pass


class BudgetExceeded(RootFindingError):
    pass
