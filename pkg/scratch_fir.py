import time

import numpy as np

from fluxcal import defaults
from fluxcal.errors import NumericError
from fluxcal.fircal import (
    FirFitConfig,
    InverseFirConfig,
    data_term_and_gradient,
    design_inverse_fir,
    dirac_deviation_energy,
    fir_design_matrix,
    fit_fir_forward,
    off_center_energy,
    probe_waveform,
    second_pass,
)
from fluxcal.lti import FilterChain, FirKernel, Waveform
from fluxcal.simulator import (
    DistortionScenario,
    FrequencyTrace,
    NoiseConfig,
    build_line,
    cascaded_lowpass_kernel,
    default_cryoscope_schedule,
    run_cryoscope,
    rectangular_pulse,
)
from fluxcal.transmon import FrequencyModel, nu

TS = defaults.TS
model = FrequencyModel(defaults.default_device(), v_dc=-0.127, spec_shift=0.0)

# --- 1. noiseless kernel recovery, lambda = 0 -------------------------------
a = probe_waveform(-0.14, 100e-9, TS)
true = cascaded_lowpass_kernel((350e6,), TS).coeffs
true = np.convolve(true, [0.8, 0.15, 0.05])
true = true[:16] / true[:16].sum()
print("true kernel taps", true.size, "peak", true.max())

t_all = a.times
A16 = fir_design_matrix(t_all, a, 16)
phi = A16 @ true
trace = FrequencyTrace(t_all, nu(model, phi), np.zeros_like(phi), np.zeros_like(phi))
cfg0 = FirFitConfig(taps=16, lambda1=0.0, lambda2=0.0)
t0 = time.time()
fit = fit_fir_forward(trace, a, model, cfg0)
print("recovery: iters", len(fit.objective), "time", time.time() - t0)
err = np.max(np.abs(fit.kernel.coeffs - true)) / np.max(np.abs(true))
print("recovery max|dh|/max|h| =", err)

# --- 2. lambda1 dominance ----------------------------------------------------
data_scale = fit.data_term if fit.data_term > 0 else np.sum(trace.f01**2)
print("data term at optimum", fit.data_term, "sum f^2", np.sum(trace.f01**2))
big = FirFitConfig(taps=16, lambda1=1e6 * np.sum(trace.f01**2), lambda2=0.0)
fit_big = fit_fir_forward(trace, a, model, big)
h2_free = float(fit.kernel.coeffs @ fit.kernel.coeffs)
h2_big = float(fit_big.kernel.coeffs @ fit_big.kernel.coeffs)
print("sum h^2 free", h2_free, "big-lambda", h2_big, "ratio", h2_big / h2_free)

# --- 3. gradient check --------------------------------------------------------
rng = np.random.default_rng(7)
worst = 0.0
for _ in range(10):
    h = rng.normal(scale=0.3, size=16)
    val, grad = data_term_and_gradient(trace, a, model, h)
    fd = np.zeros_like(h)
    for i in range(h.size):
        hp = h.copy(); hp[i] += 1e-7
        hm = h.copy(); hm[i] -= 1e-7
        fd[i] = (data_term_and_gradient(trace, a, model, hp)[0]
                 - data_term_and_gradient(trace, a, model, hm)[0]) / 2e-7
    rel = np.linalg.norm(grad - fd) / np.linalg.norm(fd)
    worst = max(worst, rel)
print("gradient worst rel err", worst)

# --- 4. noisy cryoscope fit ---------------------------------------------------
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
cryo_model = FrequencyModel(defaults.default_device(), v_dc=defaults.CRYO_BIAS_PHI0)
t0 = time.time()
ctrace = run_cryoscope(line, None, cryo_model, pulse, sched, noise)
print("cryoscope points", ctrace.t.size, "time", time.time() - t0)

aw = probe_waveform(defaults.PULSE_AMP_PHI0, defaults.CRYO_PULSE_DURATION_S, TS)
print("trace t range", ctrace.t[0], ctrace.t[-1], "support", aw.t0, aw.times[-1])
cfg = FirFitConfig(taps=120, lambda1=0.0, lambda2=0.0)
t0 = time.time()
try:
    nfit = fit_fir_forward(ctrace, aw, cryo_model, cfg)
    print("noisy fit iters", len(nfit.objective), "time", time.time() - t0)
    pred = nu(cryo_model, fir_design_matrix(ctrace.t, aw, 120) @ nfit.kernel.coeffs)
    frac = np.mean(np.abs(pred - ctrace.f01) <= 2 * ctrace.sigma_f)
    print("fraction within 2 sigma (lambda=0):", frac)
    print("kernel tail max |h[60:]|", np.max(np.abs(nfit.kernel.coeffs[60:])))
except Exception as e:
    print("noisy fit failed:", type(e).__name__, e)

# with mild regularization at data scale
scale = float(np.sum(ctrace.f01**2))
cfg_r = FirFitConfig(taps=120, lambda1=1e-9 * scale, lambda2=1e-10 * scale)
t0 = time.time()
rfit = fit_fir_forward(ctrace, aw, cryo_model, cfg_r)
pred = nu(cryo_model, fir_design_matrix(ctrace.t, aw, 120) @ rfit.kernel.coeffs)
frac = np.mean(np.abs(pred - ctrace.f01) <= 2 * ctrace.sigma_f)
print("regularized fit: iters", len(rfit.objective), "time", time.time() - t0,
      "frac within 2sig", frac, "tail", np.max(np.abs(rfit.kernel.coeffs[60:])))

# --- 5. inverse design ---------------------------------------------------------
dirac = FirKernel(np.array([2.0]), TS)
inv = design_inverse_fir(dirac, InverseFirConfig(taps=40, lambda1=0.0, target_center_index=12))
kk = np.arange(40)
d = np.exp(-0.5 * (((kk - 12) * TS) / 0.75e-9) ** 2)
expected = d / (2.0 * d.sum())
print("dirac->gaussian max err", np.max(np.abs(inv.coeffs - expected)))

short = cascaded_lowpass_kernel(defaults.SCENARIO_LOWPASS_CUTOFFS_HZ, TS)
short = FirKernel(short.coeffs / short.coeffs.sum(), TS)
print("scenario short kernel taps", short.coeffs.size, "peak idx", np.argmax(np.abs(short.coeffs)))
for lam in (0.0, 1e-6, 1e-3, 1e-1):
    try:
        inv2 = design_inverse_fir(short, InverseFirConfig(taps=240, lambda1=lam))
        cas = np.convolve(short.coeffs, inv2.coeffs)
        kk = np.arange(cas.size)
        c = np.argmax(np.abs(short.coeffs))
        dd = np.exp(-0.5 * (((kk - c) * TS) / 0.75e-9) ** 2)
        dd = dd / dd.sum()
        mism = np.linalg.norm(cas - dd) / np.linalg.norm(dd)
        print(f"lam'={lam:g}: cascade rms mismatch {mism:.4f}, ptp(inv) {np.ptp(inv2.coeffs):.3e}")
    except NumericError as e:
        print(f"lam'={lam:g}: NumericError: {e}")

# flat-kernel limit
for lam in (1e2, 1e6):
    invf = design_inverse_fir(short, InverseFirConfig(taps=240, lambda1=lam))
    print(f"lam'={lam:g}: ptp/max {np.ptp(invf.coeffs)/np.max(np.abs(invf.coeffs)):.3e}")

# singular case: broad gaussian kernel, lambda = 0
kk = np.arange(120)
broad = np.exp(-0.5 * ((kk - 60) / 15.0) ** 2)
broad = FirKernel(broad / broad.sum(), TS)
try:
    design_inverse_fir(broad, InverseFirConfig(taps=240, lambda1=0.0))
    print("broad gaussian lam=0: NO ERROR (bad)")
except NumericError as e:
    print("broad gaussian lam=0 -> NumericError:", str(e)[:60])

# --- 6. second pass -------------------------------------------------------------
# residual-free: response equals the gaussian design target
c = 10
g = np.exp(-0.5 * (((np.arange(40) - c) * TS) / 0.75e-9) ** 2)
g = g / g.sum()
Ag = fir_design_matrix(t_all, a, 40)
trace_g = FrequencyTrace(t_all, nu(model, Ag @ g), np.zeros(t_all.size), np.zeros(t_all.size))
fit2, inv2 = second_pass(trace_g, a, model,
                          FirFitConfig(taps=60, lambda1=0.0, lambda2=0.0),
                          InverseFirConfig(taps=120, lambda1=1e-3))
print("residual-free: inv2 off-center energy", off_center_energy(inv2),
      "argmax", np.argmax(np.abs(inv2.coeffs)))

# scenario: pass 1 on lowpass line, pass 2 with inv1 active
A120 = fir_design_matrix(t_all, a, short.coeffs.size)
phi1 = A120 @ short.coeffs
trace1 = FrequencyTrace(t_all, nu(model, phi1), np.zeros(t_all.size), np.zeros(t_all.size))
f1 = fit_fir_forward(trace1, a, model, FirFitConfig(taps=40, lambda1=0.0, lambda2=0.0))
inv1 = design_inverse_fir(f1.kernel, InverseFirConfig(taps=80, lambda1=1e-3))
print("pass1: fitted taps dev-from-dirac", dirac_deviation_energy(f1.kernel),
      "inv1 dev", dirac_deviation_energy(inv1))

eff = np.convolve(short.coeffs, inv1.coeffs)
Aeff = fir_design_matrix(t_all, a, eff.size)
trace2 = FrequencyTrace(t_all, nu(model, Aeff @ eff), np.zeros(t_all.size), np.zeros(t_all.size))
f2, inv2b = second_pass(trace2, a, model,
                         FirFitConfig(taps=40, lambda1=0.0, lambda2=0.0),
                         InverseFirConfig(taps=80, lambda1=1e-3))
print("pass2: inv2 dev", dirac_deviation_energy(inv2b),
      "< inv1 dev", dirac_deviation_energy(inv1))
print("pass2 fit dev-from-dirac", dirac_deviation_energy(f2.kernel),
      "pass1 fit dev", dirac_deviation_energy(f1.kernel))
