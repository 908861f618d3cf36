import numpy as np

from fluxcal import defaults
from fluxcal.errors import NumericError
from fluxcal.fircal import (
    FirFitConfig,
    InverseFirConfig,
    design_inverse_fir,
    fir_design_matrix,
    fit_fir_forward,
    probe_waveform,
)
from fluxcal.lti import FirKernel
from fluxcal.simulator import (
    DistortionScenario,
    NoiseConfig,
    build_line,
    cascaded_lowpass_kernel,
    default_cryoscope_schedule,
    rectangular_pulse,
    run_cryoscope,
)
from fluxcal.transmon import FrequencyModel, nu

TS = defaults.TS
line = build_line(
    DistortionScenario(short_time=cascaded_lowpass_kernel(defaults.SCENARIO_LOWPASS_CUTOFFS_HZ, TS)),
    TS,
)
pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, defaults.CRYO_PULSE_DURATION_S, TS)
sched = default_cryoscope_schedule()
noise = NoiseConfig(
    n_r=defaults.CRYO_N_R,
    n_theta=defaults.CRYO_N_THETA,
    seed=11,
    sigma_floor_hz=defaults.SIGMA_F_FLOOR_HZ,
    sigma_theta_rad=defaults.SIGMA_THETA_EXTRA_RAD,
)
model = FrequencyModel(defaults.default_device(), v_dc=defaults.CRYO_BIAS_PHI0)
trace = run_cryoscope(line, None, model, pulse, sched, noise)
aw = probe_waveform(defaults.PULSE_AMP_PHI0, defaults.CRYO_PULSE_DURATION_S, TS)

# baseline: true short kernel as h
htrue = line.stages[0].coeffs
Ak = fir_design_matrix(trace.t, aw, htrue.size)
pred_true = nu(model, Ak @ htrue)
z_true = (pred_true - trace.f01) / trace.sigma_f
print("true kernel: frac within 2sig", np.mean(np.abs(z_true) <= 2))

# noiseless trace through the same measurement for bias isolation
noiseless = run_cryoscope(line, None, model, pulse, sched, None)
zb = (pred_true - noiseless.f01) / trace.sigma_f
order = np.argsort(-np.abs(zb))
print("top bias points (true kernel vs noiseless measurement):")
for i in order[:10]:
    print(f"  t={noiseless.t[i]*1e9:8.3f} ns  bias/sigma={zb[i]:9.2f}  sigma={trace.sigma_f[i]/1e6:.3f} MHz")

# fit on the noiseless measurement: can ANY h reproduce it?
tr0 = noiseless
cfg = FirFitConfig(taps=120, lambda1=0.0, lambda2=0.0, max_iter=400)
fit0 = fit_fir_forward(tr0, aw, model, cfg)
pred0 = nu(model, fir_design_matrix(tr0.t, aw, 120) @ fit0.kernel.coeffs)
z0 = (pred0 - tr0.f01) / trace.sigma_f
print("fit on noiseless measurement: iters", len(fit0.objective),
      "frac within 2sig", np.mean(np.abs(z0) <= 2))
order = np.argsort(-np.abs(z0))
for i in order[:10]:
    print(f"  t={tr0.t[i]*1e9:8.3f} ns  resid/sigma={z0[i]:9.2f}")

# noisy fit, more iterations
fitn = fit_fir_forward(trace, aw, model, cfg)
predn = nu(model, fir_design_matrix(trace.t, aw, 120) @ fitn.kernel.coeffs)
zn = (predn - trace.f01) / trace.sigma_f
print("noisy fit: iters", len(fitn.objective), "frac within 2sig",
      np.mean(np.abs(zn) <= 2))
order = np.argsort(-np.abs(zn))
for i in order[:8]:
    print(f"  t={trace.t[i]*1e9:8.3f} ns  resid/sigma={zn[i]:9.2f}")

# flat limit and singularity probes
short = cascaded_lowpass_kernel(defaults.SCENARIO_LOWPASS_CUTOFFS_HZ, TS)
for lam in (1e4, 1e6, 1e8):
    invf = design_inverse_fir(short, InverseFirConfig(taps=240, lambda1=lam))
    x = invf.coeffs
    print(f"lam={lam:g}: ptp/max {np.ptp(x)/np.max(np.abs(x)):.3e}, grad2 {np.sum(np.diff(x)**2):.3e}")

for sig, n in ((6.0, 120), (8.0, 120), (10.0, 160)):
    kk = np.arange(n)
    b = np.exp(-0.5 * ((kk - n / 2) / sig) ** 2)
    b = b / b.sum()
    C = np.zeros((n + 240 - 1, 240))
    for j in range(240):
        C[j : j + n, j] = b
    m = C.T @ C
    print(f"gaussian sigma={sig} n={n}: cond(CtC) = {np.linalg.cond(m):.3e}")
