import time

import numpy as np

from fluxcal import defaults
from fluxcal.iircal import (
    default_fit_schedule,
    design_inverse_iir,
    extract_step_response,
    fit_exponential_sum,
    fit_spectral_lines,
    postdistortion_check,
)
from fluxcal.lti import FilterChain, Waveform, apply_chain, apply_sos, step_response
from fluxcal.simulator import (
    NoiseConfig,
    build_line,
    default_spec_noise,
    paper_like_scenario,
    run_spectroscopy,
)
from fluxcal.transmon import FrequencyModel, nu

ts = defaults.TS
line = build_line(paper_like_scenario(ts), ts)
model = FrequencyModel(defaults.default_device(), v_dc=defaults.SPEC_BIAS_PHI0,
                       spec_shift=defaults.DF_SPEC_HZ)
branch = defaults.SPEC_BRANCH_PHI0

t0 = time.time()
grid = run_spectroscopy(line, None, model, noise=default_spec_noise(seed=0))
trace = fit_spectral_lines(grid)
print(f"sim+linefits: {time.time()-t0:.1f}s, {len(trace)} slices kept")

sr = extract_step_response(trace, model, branch)
print("phi_peak:", sr.phi_peak, "(program step:", defaults.SPEC_STEP_PHI0, ")")
print("s range:", sr.s.min(), sr.s.max())

# rms floor from trace noise in normalized flux units
eps = 1e-5
phis = np.array([sr.s * sr.phi_peak]).ravel()
dnu = (nu(model, phis + eps) - nu(model, phis - eps)) / (2 * eps)
floor = 2.0 * np.median(trace.sigma_f / np.abs(dnu)) / abs(sr.phi_peak)
print("rms floor:", floor)

t0 = time.time()
fit = fit_exponential_sum(sr, default_fit_schedule(), rms_floor=floor)
print(f"exp fit: {time.time()-t0:.1f}s")
print("iteration rms:", fit.iteration_rms)
print("notes:", fit.notes)
print("alpha0:", fit.model.alpha0)
for (a, tau), (sa, stau) in zip(fit.model.terms, fit.term_stderr):
    print(f"  a = {a:+.4f} +- {sa:.4f}   tau = {tau:.4e} +- {stau:.2e}")

truth = sorted(defaults.SCENARIO_TERMS, key=lambda t: -t[1])
print("truth:", truth)
dom_fit = fit.model.terms[0]
print("dominant tau rel err:", abs(dom_fit[1] - truth[0][1]) / truth[0][1])

inv = design_inverse_iir(fit.model, ts)
print("inverse sections:", len(inv.sections), "gain:", inv.gain)
print("integrator flags:", [s.integrator for s in inv.sections])

# closed loop: step -> inverse -> line, inspect flatness
n = round(100e-6 / ts)
step = Waveform(np.ones(n), ts)
pred = apply_sos(inv, step)
out = apply_chain(line, pred)
t = np.arange(n) * ts
sel = t > 50e-9
dev = np.abs(out.samples[sel] - 1.0)
print("closed-loop |dev| max over t>50ns:", dev.max(), "at t =",
      t[sel][np.argmax(dev)])
sel2 = (t > 15e-9) & (t <= 50e-9)
print("closed-loop |dev| max 15-50ns:", np.abs(out.samples[sel2] - 1.0).max())

# postdistortion identity check
from fluxcal.lti import SosCascade
ident = SosCascade((), 1.0, ts)
post = postdistortion_check(trace, ident, model, branch)
print("identity postdistortion max |df|:", np.abs(post.f01 - trace.f01).max())

# ---- second pass with the first inverse active
print("\n--- repass ---")
pre1 = FilterChain((inv,))
t0 = time.time()
grid2 = run_spectroscopy(line, pre1, model, noise=default_spec_noise(seed=1))
trace2 = fit_spectral_lines(grid2)
print(f"repass sim+fits: {time.time()-t0:.1f}s, {len(trace2)} slices")
sr2 = extract_step_response(trace2, model, branch)
print("repass s range:", sr2.s.min(), sr2.s.max(), "phi_peak:", sr2.phi_peak)
fit2 = fit_exponential_sum(sr2, default_fit_schedule(repass=True), rms_floor=floor)
print("repass iteration rms:", fit2.iteration_rms)
print("repass notes:", fit2.notes)
for (a, tau), (sa, stau) in zip(fit2.model.terms, fit2.term_stderr):
    print(f"  a = {a:+.5f} +- {sa:.5f}   tau = {tau:.4e} +- {stau:.2e}")
inv2 = design_inverse_iir(fit2.model, ts)
print("inv2 sections:", len(inv2.sections), "integrator:", [s.integrator for s in inv2.sections])

chain2 = FilterChain((inv, inv2))
pred2 = apply_chain(chain2, step)
out2 = apply_chain(line, pred2)
dev2 = np.abs(out2.samples[sel] - 1.0)
print("2-pass closed-loop |dev| max t>50ns:", dev2.max(), "at",
      t[sel][np.argmax(dev2)])
print("2-pass closed-loop |dev| max 15-50ns:",
      np.abs(out2.samples[sel2] - 1.0).max())
for probe in (100e-9, 300e-9, 1e-6, 10e-6, 99e-6):
    k = round(probe / ts)
    print(f"  dev at {probe:.1e}s: {out2.samples[k]-1.0:+.2e}")
