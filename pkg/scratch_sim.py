import time

import numpy as np

from fluxcal import defaults
from fluxcal.lti import FilterChain, Waveform, apply_chain
from fluxcal.simulator import (
    NoiseConfig,
    default_cryo_noise,
    default_cryoscope_schedule,
    default_spec_noise,
    oracle_frequency_trace,
    paper_like_scenario,
    build_line,
    rectangular_pulse,
    run_cryoscope,
    run_spectroscopy,
)
from fluxcal.transmon import FrequencyModel, nu

ts = defaults.TS
line = build_line(paper_like_scenario(ts), ts)
model = FrequencyModel(defaults.default_device())

# 1. plateau normalization
step = Waveform(np.ones(400), ts)
out = apply_chain(line, step)
print("step response at ~160ns:", out.samples[-1])

# 2. noiseless cryoscope vs oracle
pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, defaults.CRYO_PULSE_DURATION_S, ts)
sched = default_cryoscope_schedule()
pairs = sched.sample_pairs(ts)
print("n pairs:", len(pairs), "first:", pairs[:3], "last:", pairs[-3:])

t0 = time.time()
tr0 = run_cryoscope(line, None, model, pulse, sched, NoiseConfig(n_r=0))
print(f"noiseless cryoscope: {time.time()-t0:.2f}s, n={len(tr0)}")
print("t increasing:", np.all(np.diff(tr0.t) > 0))

# oracle f at midpoints (smoothed pulse through line, long window)
lead = 16
n = pulse.samples.size + 600
prog = np.zeros(n)
prog[lead : lead + pulse.samples.size] = pulse.samples
from fluxcal.lti import gaussian_smooth

w = gaussian_smooth(Waveform(prog, ts, t0=-lead * ts), defaults.SIGMA_FP_S)
orc = oracle_frequency_trace(line, w, model)
f_mid = np.interp(tr0.t, orc.t, orc.f01)
bulk = (tr0.t > 10e-9) & (tr0.t < 90e-9)
err = tr0.f01 - f_mid
print("bulk |f_hat - f_oracle| max:", np.abs(err[bulk]).max())
print("all  |f_hat - f_oracle| max:", np.abs(err).max())
print("excursion at 50ns:", np.interp(50e-9, tr0.t, tr0.f01) - nu(model, 0.0))

# 3. noisy cryoscope: empirical scatter vs reported sigma_f
t0 = time.time()
reps = []
for s in range(24):
    tr = run_cryoscope(line, None, model, pulse, sched, default_cryo_noise(seed=s))
    reps.append(tr.f01)
reps = np.asarray(reps)
print(f"24 noisy runs: {time.time()-t0:.1f}s")
emp = reps.std(axis=0, ddof=1)
rep = run_cryoscope(
    line, None, model, pulse, sched, default_cryo_noise(seed=0)
).sigma_f
fine = np.isclose(np.round(np.diff([k2 - k1 for k1, k2 in pairs]), 0), 0)
dtm = np.array([k2 - k1 for k1, k2 in pairs])
for m in (1, 3, 8):
    sel = dtm == m
    print(
        f"dt={m}*ts: reported sigma_f {rep[sel].mean()/1e6:.3f} MHz, "
        f"empirical {emp[sel].mean()/1e6:.3f} MHz (n={sel.sum()})"
    )

# 4. spectroscopy
model_spec = FrequencyModel(defaults.default_device(), v_dc=defaults.SPEC_BIAS_PHI0)
t0 = time.time()
grid0 = run_spectroscopy(line, None, model_spec, noise=NoiseConfig(n_r=0))
print(f"noiseless spectroscopy: {time.time()-t0:.1f}s, shape {grid0.population.shape}")

# noiseless rows should be exact Gaussians of width 1/(2 pi sigma_drive)
sig_df = 1.0 / (2 * np.pi * defaults.SIGMA_DRIVE_S)
row = grid0.population[30]
fd = grid0.f_drive[30]
c = fd[np.argmax(row)]
resid = row - np.exp(-((fd - c) ** 2) / (2 * sig_df**2))
print("row 30 max |resid| vs analytic:", np.abs(resid).max())

# center of sweep vs idle frequency: late-time center should approach plateau
f_idle = nu(model_spec, 0.0) + model_spec.total_flux(0.0) * 0  # idle at bias
print("idle f01:", nu(model_spec, 0.0) / 1e9, "GHz")
print("center(t=10ns):", grid0.f_drive[0, grid0.population[0].argmax()] / 1e9)
print("center(t=100us):", grid0.f_drive[-1, grid0.population[-1].argmax()] / 1e9)

# 5. noisy spectroscopy: center stderr via gaussian fit on a mid row
from scipy.optimize import curve_fit

t0 = time.time()
gridn = run_spectroscopy(line, None, model_spec, noise=default_spec_noise(seed=1))
print(f"noisy spectroscopy: {time.time()-t0:.1f}s")


def gauss(f, a, f0, s, b):
    return a * np.exp(-((f - f0) ** 2) / (2 * s**2)) + b


errs = []
widths = []
for ti in range(0, 70, 7):
    fd = gridn.f_drive[ti]
    p = gridn.population[ti]
    p0 = (p.max() - p.min(), fd[p.argmax()], sig_df, p.min())
    popt, pcov = curve_fit(gauss, fd, p, p0=p0)
    errs.append(np.sqrt(pcov[1, 1]))
    widths.append(abs(popt[2]))
print("center stderr (MHz): mean", np.mean(errs) / 1e6, "range", np.min(errs) / 1e6, np.max(errs) / 1e6)
print("width (MHz): mean", np.mean(widths) / 1e6)
