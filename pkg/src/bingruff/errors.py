"""Exception types shared across the package."""


class BingruffError(Exception):
    """Base class for all domain errors."""


class DuplicateSimplex(BingruffError):
    pass


class DanglingVertexId(BingruffError):
    pass


class NonManifoldTopDim(BingruffError):
    pass


class NotPure(BingruffError):
    pass


class NonManifoldFace(BingruffError):
    pass


class MismatchedAmbient(BingruffError):
    pass


class IllegalStep(BingruffError):
    pass


class SearchBudgetExceeded(BingruffError):
    pass


class DeltaTooLarge(BingruffError):
    pass


class EmptyBoundary(BingruffError):
    pass


class BadParameters(BingruffError):
    pass


class UnknownModel(BingruffError):
    pass


class EpsilonTooSmall(BingruffError):
    def __init__(self, message, minimum_epsilon=None):
        super().__init__(message)
        self.minimum_epsilon = minimum_epsilon


class CoverFailure(BingruffError):
    """A covered step failed its immersion check; always a bug, reported loudly."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
