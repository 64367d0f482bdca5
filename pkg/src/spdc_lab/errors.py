"""Exception types shared across the package."""


class SpdcLabError(Exception):
    """Base class for all domain errors raised by this package."""


class WavelengthWindowError(SpdcLabError, ValueError):
    """Wavelength outside the validity window of the dispersion data."""


class PhaseMatchingError(SpdcLabError, RuntimeError):
    """No phase-matching solution (or no unique one) in the search window."""


class TotalInternalReflectionError(SpdcLabError, ValueError):
    """Internal angle exceeds the critical angle at the exit face."""


class UnsatisfiableConditionError(SpdcLabError, RuntimeError):
    """A closed-form design condition has no real solution."""


class ConvergenceError(SpdcLabError, RuntimeError):
    """An iterative numerical procedure failed its convergence criterion.

    Carries intermediate estimates in ``estimates`` when available.
    """

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class ConsistencyError(SpdcLabError, RuntimeError):
    """Computed quantities violate an internal consistency bound."""


class ConfigError(SpdcLabError, ValueError):
    """Configuration file is invalid; message includes the field path."""
