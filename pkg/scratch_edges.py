"""Edge-point ablation for the stage-3 FIR fit: quantify how the cryoscope
edge systematics poison the fitted kernel, with the full pipeline context
(line + fitted IIR1), and test schedule-level mitigation."""

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
    FrequencyTrace,
    NoiseConfig,
    build_line,
    default_cryoscope_schedule,
    default_spec_noise,
    paper_like_scenario,
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

line = build_line(paper_like_scenario(), TS)
grid = run_spectroscopy(line, None, model_spec, noise=default_spec_noise(7))
tr = fit_spectral_lines(grid)
sm = extract_step_response(tr, model_spec, defaults.SPEC_BRANCH_PHI0)
fit_iir = fit_exponential_sum(sm, default_fit_schedule(False),
                              default_rms_floor(tr, sm, model_spec))
iir1 = design_inverse_iir(fit_iir.model, TS)
pre = FilterChain((iir1,))

trace = run_cryoscope(line, pre, model_cryo, pulse, sched,
                      noise=NoiseConfig(n_r=0))


def masked(tr, keep):
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
    dev = (nu(model_cryo, phi.samples) - nu(model_cryo, w.samples)) / 738e6
    t = w.times
    out = []
    for lo, hi in ((15e-9, 50e-9), (50e-9, 1e-6), (1e-6, 100e-6)):
        m = (t >= lo) & (t <= hi)
        out.append(np.max(np.abs(dev[m])))
    return out


cases = {
    "all points": np.ones(len(trace), dtype=bool),
    "drop fall fine<1.3ns": ~((trace.t > DUR - 1.3e-9) & (trace.t < DUR)),
    "drop both fine<1.3ns": ~((trace.t > DUR - 1.3e-9) | (trace.t < 1.3e-9)),
    "drop fall fine<2.6ns": ~(trace.t > DUR - 2.6e-9),
    "drop both fine<2.6ns": ~((trace.t > DUR - 2.6e-9) | (trace.t < 2.6e-9)),
}

for lam1 in (1e10, 1e12):
    for label, keep in cases.items():
        t_fit = masked(trace, keep)
        fit = fit_fir_forward(t_fit, a, model_cryo,
                              FirFitConfig(lambda1=lam1, lambda2=lam1 / 3))
        fir1 = design_inverse_fir(fit.kernel, InverseFirConfig(lambda1=1e-3))
        m = metric_windows(FilterChain((iir1, fir1)))
        print(f"lam1={lam1:.0e} {label:22s} n={keep.sum():2d} "
              f"data={fit.data_term:.2e}  metric windows "
              f"[15-50ns]={m[0]:.2e} [50ns-1us]={m[1]:.2e} [1-100us]={m[2]:.2e}")
    print()
