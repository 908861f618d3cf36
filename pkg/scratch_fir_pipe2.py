"""Separate the two suspected FIR corruption channels: (a) cryoscope edge
systematics, (b) slow long-time content absorbed into the 50 ns kernel.
Uses noiseless traces and compares closed-loop deviations for lines with
and without the long-time stage."""

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


def dev_trace(chain, line):
    lead = round(5.0 * defaults.SIGMA_FP_S / TS) + 4
    n_on = round(100e-6 / TS) + 8
    program = np.zeros(lead + n_on)
    program[lead:] = defaults.PULSE_AMP_PHI0
    w = gaussian_smooth(Waveform(program, TS, t0=-lead * TS),
                        defaults.SIGMA_FP_S)
    v = apply_chain(chain, w)
    phi = apply_chain(line, v)
    dev = (nu(model_cryo, phi.samples) - nu(model_cryo, w.samples)) / 738e6
    return w.times, dev


def report(label, chain, line):
    t, dev = dev_trace(chain, line)
    rows = []
    for lo, hi in ((15e-9, 50e-9), (50e-9, 150e-9), (150e-9, 1e-6),
                   (1e-6, 100e-6)):
        m = (t >= lo) & (t <= hi)
        i = np.argmax(np.abs(dev[m]))
        rows.append(f"[{lo*1e9:4.0f},{hi*1e9:6.0f}]ns "
                    f"{dev[m][i]:+.2e}@{t[m][i]*1e9:7.1f}ns")
    print(f"{label}: " + "  ".join(rows))


def drop_edges(tr, margin=1.3e-9):
    keep = ~((tr.t > DUR - margin) | (tr.t < margin))
    return FrequencyTrace(tr.t[keep], tr.f01[keep], tr.sigma_f[keep],
                          tr.t_int[keep])


cfg = FirFitConfig(lambda1=1e11, lambda2=1e11 / 3)
inv_cfg = InverseFirConfig(lambda1=1e-3)

# case A: short-time-only line, no predistortion, noiseless
line_a = build_line(DistortionScenario(short_time=lp), TS)
tr_a = drop_edges(run_cryoscope(line_a, None, model_cryo, pulse, sched,
                                noise=quiet))
fit_a = fit_fir_forward(tr_a, a, model_cryo, cfg)
fir_a = design_inverse_fir(fit_a.kernel, inv_cfg)
print(f"A data={fit_a.data_term:.2e}")
report("A: short line, fit FIR        ", FilterChain((fir_a,)), line_a)

# oracle inverse of the true kernel for reference
fir_oracle = design_inverse_fir(lp, inv_cfg)
report("A: short line, oracle FIR     ", FilterChain((fir_oracle,)), line_a)

# case B: full line + IIR1, fitted FIR
line_b = build_line(DistortionScenario(long_time=defaults.paper_like_model(),
                                       short_time=lp), TS)
grid = run_spectroscopy(line_b, None, model_spec, noise=default_spec_noise(7))
trr = fit_spectral_lines(grid)
smm = extract_step_response(trr, model_spec, defaults.SPEC_BRANCH_PHI0)
fit_iir = fit_exponential_sum(smm, default_fit_schedule(False),
                              default_rms_floor(trr, smm, model_spec))
iir1 = design_inverse_iir(fit_iir.model, TS)

report("B: full line, IIR only        ", FilterChain((iir1,)), line_b)
tr_b = drop_edges(run_cryoscope(line_b, FilterChain((iir1,)), model_cryo,
                                pulse, sched, noise=quiet))
fit_b = fit_fir_forward(tr_b, a, model_cryo, cfg)
fir_b = design_inverse_fir(fit_b.kernel, inv_cfg)
print(f"B data={fit_b.data_term:.2e}")
report("B: full line, IIR + fitted FIR", FilterChain((iir1, fir_b)), line_b)

# case C: same as B but the FIR fitted on an oracle trace (no measurement
# systematics at all): pointwise nu of the filtered probe
grid_t = tr_b.t
from fluxcal.fircal import fir_design_matrix  # noqa: E402

phi_b = apply_chain(line_b, apply_chain(FilterChain((iir1,)), a))
f_oracle = nu(model_cryo, np.interp(grid_t, phi_b.times, phi_b.samples))
tr_c = FrequencyTrace(grid_t, f_oracle, tr_b.sigma_f, tr_b.t_int)
fit_c = fit_fir_forward(tr_c, a, model_cryo, cfg)
fir_c = design_inverse_fir(fit_c.kernel, inv_cfg)
print(f"C data={fit_c.data_term:.2e}")
report("C: full line, IIR + oracle-fit", FilterChain((iir1, fir_c)), line_b)

# kernel tails: how much mass sits beyond 10 ns in each fitted kernel
for label, k in (("A", fit_a.kernel), ("B", fit_b.kernel), ("C", fit_c.kernel)):
    c = k.coeffs
    n10 = round(10e-9 / TS)
    print(f"kernel {label}: sum={c.sum():.6f} tail|c|>10ns={np.abs(c[n10:]).sum():.3e} "
          f"first taps {np.array2string(c[:5], precision=4)}")
