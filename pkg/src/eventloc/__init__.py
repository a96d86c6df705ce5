"""Event localization in the Mott problem: amplitudes, track models and the
supporting estimates, histories, Bell and Gaussian-mixture checks."""
from ._accel import backend
from .errors import (CoverageError, EventlocError, NumericalError, ResolutionError,
                     SingularityError, ValidationError)

__version__ = "0.1.0"

__all__ = ["backend", "EventlocError", "ValidationError", "NumericalError", "ResolutionError",
           "CoverageError", "SingularityError", "__version__"]
