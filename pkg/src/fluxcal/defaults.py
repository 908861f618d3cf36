"""Shipped default configuration: device, operating points, scenario, noise.

The device parameters reproduce the reference transmon (idle 5.887 GHz,
minimum 4.151 GHz, anharmonicity -174 MHz, readout 7.556 GHz) with a
coupling of 175 MHz. Noise magnitudes are calibrated against the quoted
measurement statistics by scripts/calibrate_noise_defaults.py; FIR
regularization weights come from scripts/search_fir_lambdas.py.
"""

from __future__ import annotations

import math

from .lti import ExponentialStepModel

# AWG sampling interval
TS = 1.0 / 2.4e9

# flux-tunable transmon reproducing the reference device (fit frozen from
# scripts/fit_default_device.py; residuals below 1 Hz at all three anchors)
DEFAULT_EC_HZ = 1.7158607627e8
DEFAULT_EJ_SUM_HZ = 2.7181751483e10
DEFAULT_D = 0.506583896576
DEFAULT_OMEGA_R_HZ = 7.556e9
DEFAULT_G_HZ = 1.75e8


def default_device():
    from .transmon import TransmonParams

    return TransmonParams(
        ec=DEFAULT_EC_HZ,
        ej_sum=DEFAULT_EJ_SUM_HZ,
        d=DEFAULT_D,
        omega_r=DEFAULT_OMEGA_R_HZ,
        g=DEFAULT_G_HZ,
    )


# operating points (flux in Phi0; alpha_phi = 1, v0 = 0 by default so DC
# bias voltages equal total flux)
SPEC_BIAS_PHI0 = -0.127        # DC bias during the spectroscopic runs
SPEC_STEP_PHI0 = -0.217        # programmed step height (negative-going:
                               # a positive step would cross the sweet spot)
CRYO_BIAS_PHI0 = 0.0           # cryoscope idles at the upper insensitive point
# pulse amplitude giving a -738 MHz excursion from the sweet spot
# (approximately Phi0/4), frozen from the default device model
PULSE_AMP_PHI0 = -0.26614442531711
VERIFY_EXCURSION_HZ = -738e6

# invertible branch (flux change from the spectroscopy bias); stays more
# than 5 mPhi0 away from both flux-insensitive points
SPEC_BRANCH_PHI0 = (-0.33, 0.117)
# branch for converting cryoscope-style data taken at the sweet-spot bias
CRYO_BRANCH_PHI0 = (-0.45, -0.005)

# pulse shaping and sequence timing
SIGMA_FP_S = 0.5e-9            # Gaussian flux-pulse edge filter
SIGMA_DRIVE_S = 10e-9          # spectroscopy drive envelope width
DF_SPEC_HZ = 1.1e6             # spectroscopy line-center offset
T_FL_S = 110e-9                # flux truncation delay after the drive time
T_RO_S = 220e-9                # readout delay after the drive time
RO_COMP_TAU_S = 20e-6          # F-comp time constant for readout flux level
CRYO_PULSE_DURATION_S = 100e-9
CRYO_READOUT_MARGIN_S = 120e-9  # phase accumulation window after pulse end

# long-time distortion scenario: bias-tee high-pass plus three extra
# exponentials between 100 ns and 5 us, amplitudes summing to one
SCENARIO_ALPHA0 = 0.0
SCENARIO_TERMS = (
    (0.90, 19.2e-6),
    (0.05, 3.5e-6),
    (0.03, 0.6e-6),
    (0.02, 0.12e-6),
)
SCENARIO_LOWPASS_CUTOFFS_HZ = (300e6, 780e6)


def paper_like_model() -> ExponentialStepModel:
    return ExponentialStepModel(SCENARIO_ALPHA0, SCENARIO_TERMS)


# measurement statistics
SPEC_N_R = 2048
SPEC_N_FREQ = 41               # drive frequencies per time slice
SPEC_F_WINDOW_HZ = 100e6       # sweep half-width around the expected line
CRYO_N_R = 65536
CRYO_N_THETA = 16

# extra noise beyond the binomial readout term, calibrated so that the
# simulated statistics land on the quoted values (0.73 MHz at dt = Ts,
# 0.25 MHz at dt = 8 Ts for the cryoscope; 0.2 MHz line-center standard
# error for spectroscopy at N_R = 2048)
SIGMA_THETA_EXTRA_RAD = 4.551e-4
SIGMA_F_FLOOR_HZ = 2.346e5
SIGMA_P_EXTRA = 0.026

# spectroscopy time grid: 70 log-spaced drive times
SPEC_T_MIN_S = 10e-9
SPEC_T_MAX_S = 100e-6
SPEC_N_TIMES = 70

# sum-of-exponentials fit schedules (t_min, tau_init) per added term
EXP_FIT_SCHEDULE_FIRST = (
    (10e-6, 20e-6),
    (1e-6, 2e-6),
    (200e-9, 400e-9),
    (50e-9, 100e-9),
)
EXP_FIT_SCHEDULE_REPASS = EXP_FIT_SCHEDULE_FIRST

# FIR configuration.  The data term is weighted squared frequency error in
# Hz^2, so the lambdas carry that scale.  lambda2 multiplies a tail profile
# growing to 1000x over the kernel support; it is deliberately stiff so the
# kernel cannot soak up residual slow settling (time constants far beyond
# its 50 ns support) that belongs to the IIR stages.  Values picked by the
# closed-loop grid search in scripts/search_fir_lambdas.py.
FIR_TAPS = 120
FIR_LAMBDA1 = 1e11
FIR_LAMBDA2 = 1e14
FIR_TAIL_GROWTH_S = FIR_TAPS * TS / math.log(1e3)
FIR_INV_TAPS = 240
FIR_INV_TARGET_SIGMA_S = 0.75e-9
# Sobolev weight on the inverse.  Large enough that measurement noise in
# the fitted kernel is smoothed instead of amplified by the deconvolution;
# the cascade then approximates a wider-than-target lump rather than the
# 0.75 ns Gaussian, which costs rise sharpness below the verification
# window but keeps the closed loop quiet inside it.
FIR_INV_LAMBDA1 = 3.0

# Truncation pairs closer than this to a pulse edge see the turn-off
# transient interact with the frequency step itself, a non-LTI systematic
# of the measurement (tens of MHz at the falling edge).  The calibration
# schedule keeps fine sampling up to, but not inside, this margin.
CRYO_EDGE_MARGIN_S = 1.3e-9

# verification
VERIFY_SETTLE_S = 15e-9
VERIFY_WINDOW_S = (15e-9, 100e-6)
