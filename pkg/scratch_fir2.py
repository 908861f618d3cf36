import numpy as np

from fluxcal import defaults
from fluxcal.fircal import InverseFirConfig, design_inverse_fir
from fluxcal.lti import FirKernel
from fluxcal.simulator import cascaded_lowpass_kernel

TS = defaults.TS
short = cascaded_lowpass_kernel(defaults.SCENARIO_LOWPASS_CUTOFFS_HZ, TS)
h = short.coeffs / short.coeffs.sum()
taps = 240
n_out = h.size + taps - 1
C = np.zeros((n_out, taps))
for j in range(taps):
    C[j : j + h.size, j] = h
c = int(np.argmax(np.abs(h)))
k = np.arange(n_out)
d = np.exp(-0.5 * (((k - c) * TS) / 0.75e-9) ** 2)
print("center", c, "d support", np.sum(d > 1e-12), "sum d", d.sum())

x_ls, res, rank, sv = np.linalg.lstsq(C, d, rcond=None)
print("lstsq resid", np.linalg.norm(C @ x_ls - d) / np.linalg.norm(d),
      "rank", rank, "cond C", sv[0] / sv[-1])

m = C.T @ C
x_ne = np.linalg.solve(m, C.T @ d)
print("normal-eq resid", np.linalg.norm(C @ x_ne - d) / np.linalg.norm(d))
print("cond CtC", np.linalg.cond(m))

inv = design_inverse_fir(FirKernel(h, TS), InverseFirConfig(taps=240, lambda1=0.0))
cas = np.convolve(h, inv.coeffs)
print("cascade sum", cas.sum())
dd = d / d.sum()
print("shape mismatch vs unit-sum target:",
      np.linalg.norm(cas - dd) / np.linalg.norm(dd))
print("max cascade", cas.max(), "at", np.argmax(cas), " max dd", dd.max(), "at", np.argmax(dd))
print("first 8 cascade", np.round(cas[:8], 4))
print("first 8 dd     ", np.round(dd[:8], 4))
print("x_ls first 8", np.round(x_ls[:8], 3))
print("inv first 8 (rescaled)", np.round(inv.coeffs[:8] * (h.sum() * inv.coeffs.sum()), 3))
