"""Edge statistics of finite Gaussian ensembles: Fredholm determinants,
Airy-system resolvent functions, finite-n epsilon/calligraphic functions,
their large-n expansions and Monte-Carlo cross-checks."""

from .errors import (
    AccuracyError,
    CapabilityError,
    DomainError,
    InstabilityError,
    NumericError,
    ParameterError,
    RmtEdgeError,
    SingularityError,
    TruncationError,
)
from .specfun import ScalingParams, airy, hermite_phi, tau, tau_inverse

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "CapabilityError",
    "DomainError",
    "InstabilityError",
    "NumericError",
    "ParameterError",
    "RmtEdgeError",
    "ScalingParams",
    "SingularityError",
    "TruncationError",
    "airy",
    "hermite_phi",
    "tau",
    "tau_inverse",
    "__version__",
]
