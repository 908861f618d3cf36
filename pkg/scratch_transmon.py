import math
import time

import numpy as np
from scipy.optimize import least_squares

from fluxcal.transmon import (
    AnchorPoints,
    CorrectionTable,
    FrequencyModel,
    TransmonParams,
    eigen_frequencies,
    ej_of_flux,
    f01_model,
    fit_transmon,
    nu,
    nu_inverse,
    simulate_spec_shift,
)

# 1. large-EJ/EC asymptotic, g = 0
p = TransmonParams(ec=2.0e8, ej_sum=1.0e10, d=0.0, omega_r=7.556e9, g=0.0)
f01, f12 = eigen_frequencies(p, 0.0)
asym = math.sqrt(8 * p.ej_sum * p.ec) - p.ec
print(f"asymptotic: f01={f01/1e9:.6f} GHz vs sqrt8EJEC-EC={asym/1e9:.6f} rel dev {(f01-asym)/asym:.2e}")

# 2. g = 0 dressed equals bare
p2 = TransmonParams(ec=1.8e8, ej_sum=1.2e10, d=0.3, omega_r=7.556e9, g=0.0)
h0f, _ = eigen_frequencies(p2, -0.21)
import fluxcal.transmon as T
bare = np.linalg.eigvalsh(T._charge_hamiltonian(p2, -0.21))
print(f"decoupled: dressed-bare = {h0f - (bare[1]-bare[0]):.3e} Hz")

# 3. fit default device to Table I targets with g = 175 MHz
OMEGA_R = 7.556e9
G = 1.75e8
targets = np.array([5.887e9, -1.74e8, 4.151e9])

def resid(x):
    ec, ej, d = x
    pp = TransmonParams(ec, ej, d, OMEGA_R, G)
    a01, a12 = eigen_frequencies(pp, 0.0)
    b01, _ = eigen_frequencies(pp, -0.5)
    return np.array([a01, a12 - a01, b01]) - targets

t0 = time.time()
sol = least_squares(resid, np.array([1.74e8, 2.6e10, 0.5]), method="lm",
                    x_scale=[1e8, 1e9, 0.1], xtol=1e-15, ftol=1e-15)
print("fit time", time.time() - t0, "success", sol.success)
ec, ej, d = sol.x
print(f"ec={ec:.10e} ej_sum={ej:.10e} d={d:.12f} resid={sol.fun}")
print(f"ej/ec = {ej/ec:.2f}")

pstar = TransmonParams(ec, ej, d, OMEGA_R, G)
print("check f01(0), f12-f01, f01(-1/2):",
      eigen_frequencies(pstar, 0.0), eigen_frequencies(pstar, -0.5)[0])

# 4. spline sampler accuracy and speed
t0 = time.time()
_ = f01_model(pstar, -0.127)
print(f"sampler build: {time.time()-t0:.2f} s")
rng = np.random.default_rng(1)
phis = rng.uniform(-0.55, 0.05, 40)
direct = np.array([eigen_frequencies(pstar, x)[0] for x in phis])
fast = f01_model(pstar, phis)
print(f"spline max err {np.max(np.abs(fast-direct)):.3e} Hz")

# 5. slopes at sweet spots and at working points
for ph in (0.0, -0.5, -0.127, -0.344):
    h = 5e-4
    slope = (f01_model(pstar, ph + h) - f01_model(pstar, ph - h)) / (2 * h)
    print(f"dnu/dphi at {ph:+.3f}: {slope/1e9:+.4f} GHz/Phi0  ({slope*1e-3*1e-3:.3f} kHz/mPhi0e)")

# 6. nu / nu_inverse round trip on branch
m = FrequencyModel(pstar, CorrectionTable(), v_dc=-0.127, spec_shift=1.1e6)
# alpha_phi=1, v0=0 so total flux = v_dc + phi
for phi in (-0.05, -0.15, -0.217, -0.30):
    f = nu(m, phi)
    back = nu_inverse(m, f, (-0.45 + 0.127, -0.05 + 0.127))
    print(f"roundtrip phi={phi:+.3f}: nu={f/1e9:.6f} GHz back err {back-phi:+.2e}")

# 7. frequency excursion of interest: phi s.t. nu(phi) - nu(0) = -738 MHz
from scipy.optimize import brentq
f0 = nu(m, 0.0)
sol_phi = brentq(lambda x: nu(m, x) - (f0 - 738e6), -0.35, -0.05, xtol=1e-12)
print(f"phi for -738 MHz from bias -0.127: {sol_phi:+.6f}")

# 8. spec shift simulation
t0 = time.time()
for lev, ph in ((3, 0.0), (3, -0.127), (2, 0.0)):
    s = simulate_spec_shift(pstar, 10e-9, phi_ext=ph, levels=lev)
    print(f"spec shift levels={lev} phi={ph}: {s/1e6:+.4f} MHz  ({time.time()-t0:.1f} s)")
    t0 = time.time()

# 9. doubled anharmonicity decreases shift
ec2 = 2 * ec
ej2 = (5.887e9 + ec2) ** 2 / (8 * ec2)
pdbl = TransmonParams(ec2, ej2, d, OMEGA_R, G)
print("anharm doubled:", eigen_frequencies(pdbl, 0.0)[1] - eigen_frequencies(pdbl, 0.0)[0])
s2 = simulate_spec_shift(pdbl, 10e-9)
print(f"shift with doubled anharm: {s2/1e6:+.4f} MHz")

# 10. fit_transmon round trip from synthetic data
vsc = np.linspace(-0.01, 0.01, 9)
scan_up = np.column_stack([vsc, [f01_model(pstar, v) for v in vsc]])
scan_dn = np.column_stack([vsc - 0.5, [f01_model(pstar, v - 0.5) for v in vsc]])
anch = AnchorPoints(
    f01_at_zero=eigen_frequencies(pstar, 0.0)[0],
    f01_at_quarter=eigen_frequencies(pstar, -0.25)[0],
    f01_at_half=eigen_frequencies(pstar, -0.5)[0],
    f12_at_zero=eigen_frequencies(pstar, 0.0)[1],
)
t0 = time.time()
pfit = fit_transmon([scan_up, scan_dn], anch, OMEGA_R)
print(f"fit_transmon: {time.time()-t0:.1f} s")
for name in ("ec", "ej_sum", "d", "g", "alpha_phi", "v0"):
    a, b = getattr(pstar, name), getattr(pfit, name)
    denom = abs(a) if a != 0 else 1.0
    print(f"  {name}: true={a:.6e} fit={b:.6e} rel={abs(b-a)/denom:.2e}")
