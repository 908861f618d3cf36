"""Dissect the stage-3 forward FIR fit failure: noiseless cryoscope through
line+IIR1, per-point residual printout, with the line's ingredients toggled."""

import numpy as np

import fluxcal.defaults as defaults
from fluxcal.fircal import FirFitConfig, fit_fir_forward, probe_waveform
from fluxcal.iircal import (
    default_fit_schedule,
    default_rms_floor,
    design_inverse_iir,
    extract_step_response,
    fit_exponential_sum,
    fit_spectral_lines,
)
from fluxcal.lti import FilterChain
from fluxcal.simulator import (
    DistortionScenario,
    NoiseConfig,
    build_line,
    cascaded_lowpass_kernel,
    default_cryoscope_schedule,
    default_spec_noise,
    rectangular_pulse,
    run_cryoscope,
    run_spectroscopy,
)
from fluxcal.transmon import FrequencyModel, nu

TS = defaults.TS
device = defaults.default_device()
model_cryo = FrequencyModel(device, v_dc=defaults.CRYO_BIAS_PHI0)
pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0,
                          defaults.CRYO_PULSE_DURATION_S, TS)
sched = default_cryoscope_schedule()
a = probe_waveform(defaults.PULSE_AMP_PHI0, defaults.CRYO_PULSE_DURATION_S, TS)
quiet = NoiseConfig(n_r=0)


def iir1_for(line):
    model_spec = FrequencyModel(device, v_dc=defaults.SPEC_BIAS_PHI0,
                                spec_shift=defaults.DF_SPEC_HZ)
    grid = run_spectroscopy(line, None, model_spec,
                            noise=default_spec_noise(7))
    trace = fit_spectral_lines(grid)
    samples = extract_step_response(trace, model_spec, defaults.SPEC_BRANCH_PHI0)
    floor = default_rms_floor(trace, samples, model_spec)
    fit = fit_exponential_sum(samples, default_fit_schedule(False), floor)
    return design_inverse_iir(fit.model, TS)


def probe_case(label, line, pre):
    trace = run_cryoscope(line, pre, model_cryo, pulse, sched, noise=quiet)
    fit = fit_fir_forward(trace, a, model_cryo, FirFitConfig(lambda1=1e4,
                                                             lambda2=1e4))
    from fluxcal.fircal import fir_design_matrix

    A = fir_design_matrix(trace.t, a, fit.kernel.coeffs.size)
    r = trace.f01 - nu(model_cryo, A @ fit.kernel.coeffs)
    worst = np.argsort(-np.abs(r))[:6]
    print(f"{label}: data={fit.data_term:.3e} rms_r={np.sqrt(np.mean(r**2)):.3e}"
          f" max_r={np.max(np.abs(r)):.3e} Hz")
    for i in worst:
        print(f"   t={trace.t[i]*1e9:7.2f} ns  r={r[i]:+.3e} Hz "
              f"f01={trace.f01[i]:.6e}")


lp = cascaded_lowpass_kernel(defaults.SCENARIO_LOWPASS_CUTOFFS_HZ, TS)

line_short = build_line(DistortionScenario(short_time=lp), TS)
probe_case("short-time only, no predistortion", line_short, None)

line_full = build_line(DistortionScenario(long_time=defaults.paper_like_model(),
                                          short_time=lp), TS)
probe_case("full line, no predistortion", line_full, None)

iir1 = iir1_for(line_full)
probe_case("full line + fitted IIR1", line_full, FilterChain((iir1,)))

line_long = build_line(DistortionScenario(long_time=defaults.paper_like_model()),
                       TS)
iir1_long = iir1_for(line_long)
probe_case("long-time line + its IIR1", line_long, FilterChain((iir1_long,)))
