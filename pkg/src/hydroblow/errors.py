"""Exception hierarchy shared by all hydroblow modules.

Every error the package raises deliberately derives from HydroblowError so
callers (service layer, CLI) can map failures to stable exit codes without
string matching.
"""


class HydroblowError(Exception):
    """Base class for all package errors."""


class DomainError(HydroblowError):
    """An argument is outside the mathematical domain of an operation."""


class ConvergenceError(HydroblowError):
    """An iterative solve (root find, node solve) failed to converge."""


class CertificationError(HydroblowError):
    """A constructed object failed its certification checks."""

    def __init__(self, message: str, invariant: str = "", value: float = float("nan")):
        super().__init__(message)
        self.invariant = invariant
        self.value = value


class GridMismatchError(HydroblowError):
    """Two objects that must share a grid do not."""


class NoBlowupError(HydroblowError):
    """A blowup-time fit did not support a blowup verdict.

    Carries the fit so callers can still report slope/intercept/r2.
    """

    def __init__(self, message: str, fit=None):
        super().__init__(message)
        self.fit = fit


class StepUnderflowError(HydroblowError):
    """Adaptive step size underflowed without a clean termination event."""
