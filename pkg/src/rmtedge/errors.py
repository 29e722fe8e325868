"""Exception hierarchy shared by every module."""


class RmtEdgeError(Exception):
    """Base class for all errors raised by rmtedge."""


class DomainError(RmtEdgeError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ParameterError(RmtEdgeError, ValueError):
    """Invalid configuration or argument combination."""


class CapabilityError(RmtEdgeError):
    """Request exceeds what the implementation supports."""


class NumericError(RmtEdgeError, ArithmeticError):
    """Non-finite or otherwise unusable intermediate value."""


class SingularityError(NumericError):
    """(I - K) is singular or the kernel's spectral radius reaches 1."""

    def __init__(self, message, smallest_pivot=None):
        super().__init__(message)
        self.smallest_pivot = smallest_pivot


class TruncationError(NumericError):
    """Integrand does not decay enough at a fixed truncation point."""


class InstabilityError(NumericError):
    """ODE solution left the expected branch."""


class AccuracyError(NumericError):
    """Self-convergence target not met within the refinement budget."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
