"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class CosetRingError(Exception):
    """Base class for all package errors."""


class GroupMismatch(CosetRingError, ValueError):
    """Two objects live on different groups."""


class DomainTagError(CosetRingError, ValueError):
    """A primal function was expected and a dual one was supplied (or vice versa)."""


class AmbiguousRounding(CosetRingError, ValueError):
    """Some value sits (almost) halfway between two integers."""


class CapExceeded(CosetRingError, ValueError):
    """An enumeration would exceed the configured size cap."""


class BudgetExceeded(CosetRingError, ValueError):
    """A combinatorial search would exceed the configured work budget."""


class NotDissociated(CosetRingError, ValueError):
    """A Riesz product was requested for a set that is not dissociated."""


class EmptyLevelSet(CosetRingError, ValueError):
    """A smoothing measure was requested on an empty level set."""


class LevelDomainError(CosetRingError, ValueError):
    """A Bourgain system level outside [0, 4] was queried."""


class DimensionCertificateError(CosetRingError, ValueError):
    """A system violates the doubling bound implied by its dimension certificate."""


class NotFound(CosetRingError):
    """No grid point satisfies the regularity inequality."""

    def __init__(self, message: str, best_lambda: float, best_violation: float):
        super().__init__(message)
        self.best_lambda = best_lambda
        self.best_violation = best_violation


class NonRegularInput(CosetRingError, ValueError):
    """The input system fails the regularity test."""


class IterationBudgetExceeded(CosetRingError):
    """The refinement loop ran past its proven iteration bound."""


class RefinementStalled(IterationBudgetExceeded):
    """A refinement step left the system unchanged, so the loop cannot progress."""


class EmptySpectrum(CosetRingError):
    """The large spectrum is empty."""


class NotConnected(CosetRingError):
    """The support is not arithmetically connected at the requested order."""

    def __init__(self, message: str, verdict):
        super().__init__(message)
        self.verdict = verdict


class ZeroSupport(CosetRingError, ValueError):
    """The rounded function is identically zero."""


class SplitFailed(CosetRingError):
    """Neither branch of the splitting step could be certified."""


class ModulusTooSmall(CosetRingError, ValueError):
    """Two frequencies collide modulo the chosen modulus."""
