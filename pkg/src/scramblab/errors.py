"""Exception types shared across the package."""


class InvalidDimensionError(ValueError):
    """A dimension argument is zero, negative, or otherwise unusable."""


class DimensionMismatchError(ValueError):
    """Two objects that must share a dimension do not."""


class InvalidParameterError(ValueError):
    """A scalar parameter violates an operation's precondition."""


class ResourceLimitError(RuntimeError):
    """The request exceeds the size this desk-scale implementation supports."""


class ScheduleError(InvalidParameterError):
    """A shock schedule is malformed (non-increasing times, time beyond T, ...)."""


class ShockKeyError(InvalidParameterError):
    """A shock key does not match the ensemble it is used with."""


class NoScramblingError(RuntimeError):
    """The correlator never decayed below threshold on the search grid."""

    def __init__(self, message: str, final_otoc: float):
        super().__init__(message)
        self.final_otoc = final_otoc


class SparseSetError(RuntimeError):
    """Rejection sampling hit its retry cap; carries the observed acceptance rate."""

    def __init__(self, message: str, acceptance_rate: float):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate


class BudgetViolationError(RuntimeError):
    """A distinguisher strategy requested more state copies than it was granted."""


class DegenerateFitError(RuntimeError):
    """A log-log fit was requested on data containing zeros."""


class SearchInconclusiveError(RuntimeError):
    """State-space search exhausted its frontier without reaching the target."""

    def __init__(self, message: str, best_distance: float):
        super().__init__(message)
        self.best_distance = best_distance
