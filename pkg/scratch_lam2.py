"""Ladder over the tail-growth penalty lambda2 crossed with edge trimming,
measuring the closed-loop deviation of the full IIR1+FIR1 chain on the
paper-like scenario (noiseless cryoscope trace, seed-7 spectroscopy)."""

import numpy as np

import fluxcal.defaults as defaults
from fluxcal.fircal import (
    FirFitConfig,
    InverseFirConfig,
    design_inverse_fir,
    fit_fir_forward,
    probe_waveform,
)
from fluxcal.iircal import (
    default_fit_schedule,
    default_rms_floor,
    design_inverse_iir,
    extract_step_response,
    fit_exponential_sum,
    fit_spectral_lines,
)
from fluxcal.lti import FilterChain, Waveform, apply_chain, gaussian_smooth
from fluxcal.simulator import (
    DistortionScenario,
    FrequencyTrace,
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
DUR = defaults.CRYO_PULSE_DURATION_S
device = defaults.default_device()
model_cryo = FrequencyModel(device, v_dc=defaults.CRYO_BIAS_PHI0)
model_spec = FrequencyModel(device, v_dc=defaults.SPEC_BIAS_PHI0,
                            spec_shift=defaults.DF_SPEC_HZ)
pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, DUR, TS)
sched = default_cryoscope_schedule()
a = probe_waveform(defaults.PULSE_AMP_PHI0, DUR, TS)
lp = cascaded_lowpass_kernel(defaults.SCENARIO_LOWPASS_CUTOFFS_HZ, TS)
quiet = NoiseConfig(n_r=0)

line = build_line(DistortionScenario(long_time=defaults.paper_like_model(),
                                     short_time=lp), TS)
grid = run_spectroscopy(line, None, model_spec, noise=default_spec_noise(7))
trr = fit_spectral_lines(grid)
smm = extract_step_response(trr, model_spec, defaults.SPEC_BRANCH_PHI0)
fit_iir = fit_exponential_sum(smm, default_fit_schedule(False),
                              default_rms_floor(trr, smm, model_spec))
iir1 = design_inverse_iir(fit_iir.model, TS)

tr_full = run_cryoscope(line, FilterChain((iir1,)), model_cryo, pulse, sched,
                        noise=quiet)


def drop_edges(tr, margin):
    keep = ~((tr.t > DUR - margin) | (tr.t < margin))
    return FrequencyTrace(tr.t[keep], tr.f01[keep], tr.sigma_f[keep],
                          tr.t_int[keep])


def metric_windows(chain):
    lead = round(5.0 * defaults.SIGMA_FP_S / TS) + 4
    n_on = round(100e-6 / TS) + 8
    program = np.zeros(lead + n_on)
    program[lead:] = defaults.PULSE_AMP_PHI0
    w = gaussian_smooth(Waveform(program, TS, t0=-lead * TS),
                        defaults.SIGMA_FP_S)
    v = apply_chain(chain, w)
    phi = apply_chain(line, v)
    dev = np.abs(nu(model_cryo, phi.samples) - nu(model_cryo, w.samples)) / 738e6
    t = w.times
    parts = []
    for lo, hi in ((15e-9, 50e-9), (50e-9, 1e-6), (1e-6, 100e-6)):
        m = (t >= lo) & (t <= hi)
        parts.append(f"{dev[m].max():.2e}")
    mtot = dev[(t >= 15e-9) & (t <= 100e-6)].max()
    return f"total={mtot:.2e}  [15-50ns]={parts[0]} [50ns-1us]={parts[1]} [1-100us]={parts[2]}"


print("IIR1 only:", metric_windows(FilterChain((iir1,))))
inv_cfg = InverseFirConfig(lambda1=1e-3)
for margin in (0.0, 1.3e-9):
    tr = drop_edges(tr_full, margin) if margin else tr_full
    for lam2 in (1e11 / 3, 1e13, 1e14, 1e15, 1e16, 1e17):
        cfg = FirFitConfig(lambda1=1e11, lambda2=lam2)
        try:
            fit = fit_fir_forward(tr, a, model_cryo, cfg)
            fir1 = design_inverse_fir(fit.kernel, inv_cfg)
            tail = np.abs(fit.kernel.coeffs[round(10e-9 / TS):]).sum()
            print(f"margin={margin*1e9:.1f}ns lam2={lam2:8.1e} "
                  f"data={fit.data_term:9.2e} tail={tail:.1e}  "
                  + metric_windows(FilterChain((iir1, fir1))))
        except Exception as exc:
            print(f"margin={margin*1e9:.1f}ns lam2={lam2:8.1e} FAILED: {exc}")
