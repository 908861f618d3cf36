"""fluxcal: characterize and compensate flux-control-line distortions.

The package simulates the signal path of a flux-tunable transmon's control
line, extracts the line's step response from simulated spectroscopy and
cryoscope measurements, and designs IIR + FIR predistortion filters that are
verified against the ground-truth simulator.
"""

from .errors import (
    CalibrationError,
    ConfigurationError,
    DomainError,
    FitConvergenceError,
    NumericError,
    ValidationError,
    VerificationError,
)
from .lti import (
    ExponentialStepModel,
    FilterChain,
    FirKernel,
    SosCascade,
    SosSection,
    Waveform,
    apply_chain,
    apply_sos,
    convolve,
    discretize_roots,
    gaussian_smooth,
    pair_into_sos,
    step_response_eval,
)

__version__ = "0.1.0"
