"""Exception types raised across the package."""


class IsingCauseError(Exception):
    """Base class for all package errors."""


class SiteOutOfWindow(IsingCauseError):
    pass


class InvalidSite(IsingCauseError):
    pass


class UnsupportedRegion(IsingCauseError):
    pass


class NotUnitVector(IsingCauseError):
    pass


class LambdaOutOfRange(IsingCauseError):
    pass


class InvalidState(IsingCauseError):
    pass


class UnspecifiedDynamics(IsingCauseError):
    """The causal automorphism is only fixed on half-integer generators."""


class NoncommutingPair(IsingCauseError):
    pass


class MalformedPartition(IsingCauseError):
    pass


class ZeroWeightCell(IsingCauseError):
    pass


class ZeroConditioningEvent(IsingCauseError):
    pass


class MalformedInput(IsingCauseError):
    pass


class DomainError(IsingCauseError):
    pass


class MalformedGamma(IsingCauseError):
    pass


class BudgetExhausted(IsingCauseError):
    """Optimizer ran out of budget before converging; ``best`` holds the best value seen."""

    def __init__(self, best, message="optimization budget exhausted"):
        super().__init__(f"{message} (best value {best!r})")
        self.best = best
