"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: configuration problems exit with 2,
fit non-convergence with 3, and failed verification assertions with 4.
"""


class CalibrationError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(CalibrationError):
    """Inconsistent or invalid configuration input."""


class ValidationError(CalibrationError):
    """Malformed numerical input, e.g. complex roots without conjugate partners."""


class DomainError(CalibrationError):
    """A requested value lies outside the representable or invertible domain."""


class FitConvergenceError(CalibrationError):
    """An optimizer failed to converge.

    ``history`` carries per-iteration diagnostics (objective or RMS values)
    so the caller can inspect what went wrong.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class NumericError(CalibrationError):
    """Numerical failure such as an unstable design or a singular system."""


class VerificationError(CalibrationError):
    """A verification metric exceeded its threshold in assertion mode."""
