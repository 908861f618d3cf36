import numpy as np

from fluxcal import defaults
from fluxcal.fircal import (
    FirFitConfig,
    InverseFirConfig,
    design_inverse_fir,
    fir_design_matrix,
    fit_fir_forward,
    probe_waveform,
)
from fluxcal.simulator import FrequencyTrace
from fluxcal.transmon import FrequencyModel, nu

TS = defaults.TS
m = FrequencyModel(defaults.default_device(), v_dc=-0.127)
a = probe_waveform(-0.14, 100e-9, TS)

g = np.exp(-0.5 * (((np.arange(40) - 10) * TS) / 0.75e-9) ** 2)
g = g / g.sum()
A = fir_design_matrix(a.times, a, 40)
z = np.zeros(a.times.size)
trace = FrequencyTrace(a.times, nu(m, A @ g), z, z)

fit = fit_fir_forward(trace, a, m, FirFitConfig(taps=60, lambda1=0.0, lambda2=0.0))
h2 = fit.kernel.coeffs
gp = np.concatenate([g, np.zeros(20)])
print("iters", len(fit.objective), "data_term", fit.data_term)
print("max|h2-g|", np.max(np.abs(h2 - gp)), "at", np.argmax(np.abs(h2 - gp)))
print("objective tail", fit.objective[-4:])

A60 = fir_design_matrix(a.times, a, 60)
print("cond(A60)", np.linalg.cond(A60))
print("rank", np.linalg.matrix_rank(A60), "of", A60.shape)

# direct linear LS in flux space as an oracle
phi_meas = A @ g
h_lin, *_ = np.linalg.lstsq(A60, phi_meas, rcond=None)
print("linear-LS max|h-g|", np.max(np.abs(h_lin - gp)))
