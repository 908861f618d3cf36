"""Solve for the default device parameters.

Finds {EC, EJ_sum, d} such that the dressed transmon hits the published
operating points (sweet-spot f01, f01 at half flux quantum, sweet-spot
anharmonicity) with the resonator fixed at 7.556 GHz and g = 175 MHz.
Three constraints determine three parameters; g cannot be separated from
them with these anchors alone, so it stays at a typical value.

Prints the values that are frozen in fluxcal.defaults.
"""

from scipy.optimize import least_squares

from fluxcal.transmon import TransmonParams, eigen_frequencies

F01_SWEET = 5.887e9
F01_HALF = 4.151e9
ANHARMONICITY = -174e6
OMEGA_R = 7.556e9
G = 1.75e8


def residuals(x):
    ec, ej, d = x
    p = TransmonParams(ec=ec, ej_sum=ej, d=d, omega_r=OMEGA_R, g=G)
    f01_0, f12_0 = eigen_frequencies(p, 0.0)
    f01_h, _ = eigen_frequencies(p, 0.5)
    return [
        (f01_0 - F01_SWEET) / 1e6,
        (f01_h - F01_HALF) / 1e6,
        (f12_0 - f01_0 - ANHARMONICITY) / 1e6,
    ]


def main():
    ec0 = -ANHARMONICITY
    ej0 = (F01_SWEET + ec0) ** 2 / (8 * ec0)
    # asymptotic seed for d from f01(half) ~ sqrt(8 d EJ EC) - EC
    d0 = (F01_HALF + ec0) ** 2 / (8 * ec0 * ej0)
    sol = least_squares(
        residuals,
        x0=[ec0, ej0, d0],
        x_scale=[1e8, 1e9, 0.1],
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    ec, ej, d = sol.x
    print("residuals (MHz):", residuals(sol.x))
    print(f"DEFAULT_EC_HZ = {ec:.10e}")
    print(f"DEFAULT_EJ_SUM_HZ = {ej:.10e}")
    print(f"DEFAULT_D = {d:.12f}")
    print(f"DEFAULT_OMEGA_R_HZ = {OMEGA_R:.4e}")
    print(f"DEFAULT_G_HZ = {G:.3e}")


if __name__ == "__main__":
    main()
