"""Build calibration vector fields for free-discontinuity energies and verify them numerically."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CalibrixError,
    ConstraintViolation,
    DomainError,
    HypothesisError,
    NoConvergence,
    QuadratureFailure,
)
from .fields import Kind, Region  # noqa: E402
from .params import derive_model_params, derive_shifted_params  # noqa: E402

__all__ = [
    "CalibrixError",
    "ConstraintViolation",
    "DomainError",
    "HypothesisError",
    "Kind",
    "NoConvergence",
    "QuadratureFailure",
    "Region",
    "__version__",
    "derive_model_params",
    "derive_shifted_params",
]
