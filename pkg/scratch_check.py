"""Scratch numerics checks (not shipped)."""
import numpy as np
from fluxcal.lti import (
    ExponentialStepModel, Waveform, pair_into_sos, discretize_roots,
    realize_matched_z, realize_step_invariant, apply_sos, step_response,
    step_response_eval, transfer_function_roots,
)

TS = 1.0 / 2.4e9


def inverse_of(m, ts=TS):
    zeros, poles, hf = transfer_function_roots(m)
    return pair_into_sos(discretize_roots(poles, ts), discretize_roots(zeros, ts), 1.0, ts)


def flatness(m, n=300000, skip_mult=5.0):
    fwd = realize_matched_z(m, TS)
    inv = inverse_of(m)
    x = Waveform(np.ones(n), TS)
    y = apply_sos(inv, apply_sos(fwd, x))
    level = m.instantaneous
    k0 = int(skip_mult * max(m.taus) / TS)
    rel = np.abs(y.samples / level - 1.0)
    return rel.max(), rel[min(k0, n - 1):].max()


# N=6 mixed taus 5ns..20us
m6 = ExponentialStepModel(0.0, ((0.55, 20e-6), (0.2, 5e-6), (0.1, 5e-7), (0.08, 5e-8), (0.05, 5e-9), (0.02, 1e-6)))
print("N=6 alpha0=0 flatness (max, after 5*tau_max):", flatness(m6, n=300000))

# repass-style: alpha0=1 with small mixed-sign residual terms
mr = ExponentialStepModel(1.0, ((0.004, 8e-6), (-0.006, 9e-7), (0.003, 9e-8)))
print("repass N=3 alpha0=1 flatness:", flatness(mr, n=150000))
z, p, hf = transfer_function_roots(mr)
print("  zeros:", np.sort_complex(z), " poles:", p)

# repass with stronger negative terms -> possibly complex or RHP roots?
mneg = ExponentialStepModel(1.0, ((-0.3, 2e-6), (0.2, 3e-7)))
try:
    z, p, hf = transfer_function_roots(mneg)
    print("mneg zeros:", z, "-> inverse poles z:", np.exp(np.real(z) * TS))
    print("mneg flatness:", flatness(mneg, n=100000))
except Exception as e:
    print("mneg:", e)

# ZOH exactness for N=6
line6 = realize_step_invariant(m6, TS)
n = 250000
resp = step_response(line6, n)
exact = step_response_eval(m6, TS * np.arange(n))
print("N=6 ZOH exactness:", np.max(np.abs(resp - exact)))

# single-term ZOH: e^-1 at tau
m1 = ExponentialStepModel(0.0, ((1.0, 19.2e-6),))
l1 = realize_step_invariant(m1, TS)
k = round(19.2e-6 / TS)
r = step_response(l1, k + 1)
print("single-term at tau:", r[k], "vs", np.exp(-k * TS / 19.2e-6))

# ZOH line + matched-z inverse for the paper-like 4-term scenario: residual profile
m4 = ExponentialStepModel(0.0, ((0.9, 19.2e-6), (0.05, 3.5e-6), (0.03, 6e-7), (0.02, 1.2e-7)))
line = realize_step_invariant(m4, TS)
inv = inverse_of(m4)
x = Waveform(np.ones(250000), TS)
y = apply_sos(inv, apply_sos(line, x))
rel = y.samples / m4.instantaneous - 1.0
for tns in (2, 15, 50, 200, 1000, 5000, 20000, 100000):
    kk = int(tns * 1e-9 / TS)
    if kk < len(rel):
        print(f"  t={tns}ns rel dev {rel[kk]:+.3e}")
