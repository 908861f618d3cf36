"""Flux-to-frequency model of a flux-tunable transmon.

The transmon is described in the charge basis and coupled to a single
readout-resonator mode. On top of the Hamiltonian model sit an empirical
correction table, the voltage-to-flux conversion, a cached fast evaluator
nu(phi), its inverse, the device parameter fit, and a driven three-level
simulation that quantifies the line-center bias of pulsed spectroscopy.

Energies are expressed as frequencies (E/h, in Hz) throughout; flux is in
units of the flux quantum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, curve_fit, least_squares

from .errors import (
    ConfigurationError,
    DomainError,
    FitConvergenceError,
    NumericError,
    ValidationError,
)

_SPLINE_GRID_N = 1601


@dataclass(frozen=True)
class TransmonParams:
    """Device parameters of the transmon-resonator system.

    ec, ej_sum, omega_r and g are E/h values in Hz. d is the junction
    asymmetry. alpha_phi converts bias voltage to flux (Phi0 per volt) and
    v0 is the voltage offset of the flux-insensitive point.
    """

    ec: float
    ej_sum: float
    d: float
    omega_r: float
    g: float
    alpha_phi: float = 1.0
    v0: float = 0.0
    n_charge: int = 15
    n_res: int = 3

    def __post_init__(self):
        for name in ("ec", "ej_sum", "d", "omega_r", "g", "alpha_phi", "v0"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"non-finite parameter {name}")
        if self.ec <= 0 or self.ej_sum <= 0:
            raise ValidationError("ec and ej_sum must be positive")
        if not 0.0 <= self.d < 1.0:
            raise ValidationError(f"junction asymmetry d={self.d} outside [0, 1)")
        if self.g < 0:
            raise ValidationError("coupling g must be non-negative")
        if self.n_charge < 2 or self.n_res < 1:
            raise ValidationError("basis truncation too small")
        if self.ej_sum / self.ec < 20:
            warnings.warn(
                f"ej_sum/ec = {self.ej_sum / self.ec:.1f} is outside the "
                "transmon regime; the charge-basis truncation may be inadequate",
                stacklevel=2,
            )


@dataclass(frozen=True)
class CorrectionTable:
    """Tabulated difference between the Hamiltonian model and measured f01.

    Entries are (total flux in Phi0, frequency difference in Hz), linearly
    interpolated and clamped to the endpoint values outside the table.
    An empty table means no correction.
    """

    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        xs = [x for x, _ in pts]
        if any(not math.isfinite(x) or not math.isfinite(y) for x, y in pts):
            raise ValidationError("non-finite correction table entry")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValidationError("correction abscissae must be strictly increasing")

    def delta_f(self, phi_total):
        """Correction at total flux phi_total (Phi0), vectorized."""
        if not self.points:
            return np.zeros_like(np.asarray(phi_total, dtype=float))
        xs = np.array([x for x, _ in self.points])
        ys = np.array([y for _, y in self.points])
        return np.interp(phi_total, xs, ys)


@dataclass(frozen=True)
class FrequencyModel:
    """Qubit frequency model tied to a DC operating point.

    nu(phi) evaluates the corrected f01 at flux change phi relative to the
    bias. spec_shift is the line-center offset of pulsed spectroscopy that
    callers subtract from spectroscopic frequencies before inverting.
    """

    params: TransmonParams
    correction: CorrectionTable = field(default_factory=CorrectionTable)
    v_dc: float = 0.0
    spec_shift: float = 0.0

    def total_flux(self, phi):
        """Total flux in Phi0 at flux change phi from the DC operating point."""
        p = self.params
        return p.alpha_phi * (self.v_dc - p.v0) + np.asarray(phi, dtype=float)


def ej_of_flux(p: TransmonParams, phi_ext) -> np.ndarray | float:
    """Effective Josephson energy (Hz) of the asymmetric SQUID at phi_ext (Phi0).

    Evaluates ej_sum * sqrt(cos^2 + d^2 sin^2), which equals the textbook
    |cos|*sqrt(1 + d^2 tan^2) form without the tangent blowup at half flux.
    """
    x = np.pi * np.asarray(phi_ext, dtype=float)
    c, s = np.cos(x), np.sin(x)
    return p.ej_sum * np.sqrt(c * c + (p.d * s) ** 2)


def _charge_hamiltonian(p: TransmonParams, phi_ext: float) -> np.ndarray:
    n = np.arange(-p.n_charge, p.n_charge + 1, dtype=float)
    h = np.diag(4.0 * p.ec * n * n)
    off = np.full(2 * p.n_charge, -0.5 * float(ej_of_flux(p, phi_ext)))
    h += np.diag(off, 1) + np.diag(off, -1)
    return h


def _eigh(h: np.ndarray):
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        scale = float(np.max(np.abs(h)))
        raise NumericError(
            f"eigensolve failed for dimension {h.shape[0]} "
            f"(max |H| = {scale:.3e} Hz): {exc}"
        ) from exc


def eigen_frequencies(p: TransmonParams, phi_ext: float) -> tuple[float, float]:
    """Dressed transition frequencies (f01, f12) in Hz at external flux phi_ext.

    Diagonalizes the transmon charge-basis Hamiltonian coupled to n_res
    photon states of the readout resonator and identifies the dressed
    levels by maximum squared overlap with the bare zero-photon states.
    """
    h0 = _charge_hamiltonian(p, phi_ext)
    bare_vals, bare_vecs = _eigh(h0)

    dim_t = h0.shape[0]
    dim_r = p.n_res
    nq = np.diag(np.arange(-p.n_charge, p.n_charge + 1, dtype=float))
    a = np.diag(np.sqrt(np.arange(1, dim_r, dtype=float)), 1)
    h = (
        np.kron(h0, np.eye(dim_r))
        + np.kron(np.eye(dim_t), p.omega_r * (a.T @ a))
        + p.g * np.kron(nq, a + a.T)
    )
    vals, vecs = _eigh(h)

    # overlap of each dressed eigenvector with |transmon j> x |0 photons>
    r0 = np.zeros(dim_r)
    r0[0] = 1.0
    picked = []
    for j in range(3):
        bare = np.kron(bare_vecs[:, j], r0)
        idx = int(np.argmax(np.abs(vecs.T @ bare) ** 2))
        picked.append(idx)
    if len(set(picked)) != 3:
        raise NumericError(
            f"dressed-state identification is not one-to-one (indices {picked})"
        )
    e0, e1, e2 = (vals[k] for k in picked)
    return float(e1 - e0), float(e2 - e1)


@lru_cache(maxsize=8)
def _f01_sampler(p: TransmonParams) -> CubicSpline:
    """Cubic-spline evaluator of the dressed f01 over half a flux period.

    f01 is even and Phi0-periodic in the external flux, so sampling the
    fundamental domain [0, 1/2] suffices; both endpoints are flux-insensitive,
    which pins the spline boundary slopes to zero exactly.
    """
    x = np.linspace(0.0, 0.5, _SPLINE_GRID_N)
    y = np.array([eigen_frequencies(p, xi)[0] for xi in x])
    return CubicSpline(x, y, bc_type=((1, 0.0), (1, 0.0)))


def _fold_flux(phi_total):
    x = np.mod(np.asarray(phi_total, dtype=float), 1.0)
    return np.minimum(x, 1.0 - x)


def f01_model(p: TransmonParams, phi_total):
    """Dressed f01 (Hz) at total flux (Phi0), fast cached evaluation."""
    return _f01_sampler(p)(_fold_flux(phi_total))


def nu(m: FrequencyModel, phi):
    """Corrected qubit frequency (Hz) at flux change phi (Phi0), vectorized."""
    phi_total = m.total_flux(phi)
    out = f01_model(m.params, phi_total) - m.correction.delta_f(phi_total)
    return float(out) if np.ndim(phi) == 0 else out


def nu_inverse(m: FrequencyModel, f: float, branch: tuple[float, float]):
    """Flux change phi (Phi0) with nu(phi) = f on a monotonic branch.

    branch is an interval of flux change over which nu must be strictly
    monotonic; the root is bracketed and solved to well below 1e-7 Phi0.
    """
    lo, hi = float(branch[0]), float(branch[1])
    if not lo < hi:
        raise ConfigurationError(f"empty branch ({lo}, {hi})")
    grid = np.linspace(lo, hi, 201)
    vals = nu(m, grid)
    dv = np.diff(vals)
    if not (np.all(dv > 0) or np.all(dv < 0)):
        raise ConfigurationError(
            "nu is not monotonic on the requested branch; move the branch "
            "at least 5 mPhi0 away from flux-insensitive points"
        )
    fa, fb = vals[0], vals[-1]
    if not (min(fa, fb) <= f <= max(fa, fb)):
        raise DomainError(
            f"target frequency {f:.6e} Hz outside the branch range "
            f"[{min(fa, fb):.6e}, {max(fa, fb):.6e}] Hz"
        )
    return brentq(lambda x: nu(m, x) - f, lo, hi, xtol=1e-10, rtol=8.9e-16)


def fit_parabola_vertex(x, y) -> tuple[float, float]:
    """Least-squares parabola through (x, y); returns (x_vertex, y_vertex).

    Raises when the points do not bracket the extremum.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 5:
        raise ValidationError("need at least 5 points around the extremum")
    # center for conditioning
    x0 = x.mean()
    c2, c1, c0 = np.polyfit(x - x0, y, 2)
    if c2 == 0.0:
        raise FitConvergenceError("scan has no curvature")
    xv = -c1 / (2.0 * c2)
    if not x.min() - x0 <= xv <= x.max() - x0:
        raise FitConvergenceError(
            "scan does not bracket the extremum of the fitted parabola"
        )
    return float(xv + x0), float(c0 - c1 * c1 / (4.0 * c2))


@dataclass(frozen=True)
class AnchorPoints:
    """Transition frequencies pinning the Hamiltonian fit (all Hz)."""

    f01_at_zero: float
    f01_at_quarter: float
    f01_at_half: float
    f12_at_zero: float


def fit_transmon(
    sweet_spot_scans,
    anchors: AnchorPoints,
    omega_r: float,
    g_init: float = 1.5e8,
    n_charge: int = 15,
    n_res: int = 3,
) -> TransmonParams:
    """Fit device parameters from two sweet-spot scans and four anchors.

    sweet_spot_scans are two arrays of (v_dc, f01_hz) rows, one around each
    first-order flux-insensitive point. Parabola vertices locate the bias
    voltages of total flux 0 and -1/2, fixing alpha_phi and v0; the
    remaining {ec, ej_sum, d, g} are found by least squares against the
    anchor frequencies with the eigensolve inside the loop.
    """
    if len(sweet_spot_scans) != 2:
        raise ValidationError("expected exactly two sweet-spot scans")
    verts = []
    for scan in sweet_spot_scans:
        arr = np.asarray(scan, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValidationError("scan must be an array of (v_dc, f01) rows")
        verts.append(fit_parabola_vertex(arr[:, 0], arr[:, 1]))
    # the scan with the higher vertex frequency sits at total flux 0
    (v_up, _), (v_dn, _) = sorted(verts, key=lambda t: -t[1])
    v0 = v_up
    if v_dn == v_up:
        raise FitConvergenceError("sweet-spot scans found identical bias voltages")
    alpha_phi = -0.5 / (v_dn - v0)

    targets = np.array(
        [anchors.f01_at_zero, anchors.f01_at_quarter, anchors.f01_at_half,
         anchors.f12_at_zero]
    )
    fluxes = (0.0, -0.25, -0.5)

    def residual(x):
        ec, ej, d, g = x
        try:
            p = TransmonParams(ec, ej, d, omega_r, g,
                               n_charge=n_charge, n_res=n_res)
        except ValidationError:
            return np.full(4, 1e9)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f01s = [eigen_frequencies(p, ph)[0] for ph in fluxes]
            f12 = eigen_frequencies(p, 0.0)[1]
        return np.array([*f01s, f12]) - targets

    # asymptotic transmon relations seed the search
    ec0 = anchors.f01_at_zero - anchors.f12_at_zero
    ej0 = (anchors.f01_at_zero + ec0) ** 2 / (8.0 * ec0)
    d0 = min(0.95, (anchors.f01_at_half + ec0) ** 2 / (8.0 * ec0 * ej0))
    x0 = np.array([ec0, ej0, d0, g_init])
    res = least_squares(
        residual, x0, method="lm",
        x_scale=np.array([1e8, 1e9, 0.1, 1e8]),
        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=400,
    )
    if not res.success:
        raise FitConvergenceError(
            f"transmon parameter fit did not converge: {res.message}",
            history=res.fun.tolist(),
        )
    if np.max(np.abs(res.fun)) > 1e5:
        raise FitConvergenceError(
            "fitted model misses an anchor frequency by more than 100 kHz",
            history=res.fun.tolist(),
        )
    ec, ej, d, g = res.x
    return TransmonParams(ec, ej, d, omega_r, g, alpha_phi=alpha_phi, v0=v0,
                          n_charge=n_charge, n_res=n_res)


def _gaussian_line(f, amp, center, width, base):
    return amp * np.exp(-((f - center) ** 2) / (2.0 * width**2)) + base


def simulate_spec_shift(
    p: TransmonParams,
    sigma_drive: float,
    phi_ext: float = 0.0,
    levels: int = 3,
) -> float:
    """Line-center bias (Hz) of pulsed spectroscopy from second-state leakage.

    Integrates a resonantly driven transmon truncated to `levels` states
    under a Gaussian pi-pulse envelope of width sigma_drive across a sweep
    of drive frequencies, fits a Gaussian to the excited-state population,
    and returns (fitted center - nominal f01). Restricting to two levels
    removes the bias.
    """
    if sigma_drive <= 0:
        raise ValidationError("sigma_drive must be positive")
    if levels not in (2, 3):
        raise ValidationError("the drive simulation supports 2 or 3 levels")
    f01, f12 = eigen_frequencies(p, phi_ext)
    anharm = f12 - f01

    # pi rotation in the two-level limit: integral of the Rabi rate is 1/2
    omega_pk = 0.5 / (sigma_drive * math.sqrt(2.0 * math.pi))
    t = np.arange(-4.0 * sigma_drive, 4.0 * sigma_drive, sigma_drive / 400.0)
    dt = t[1] - t[0]
    envelope = omega_pk * np.exp(-0.5 * (t / sigma_drive) ** 2)

    detunings = np.linspace(-4e7, 4e7, 81)  # drive frequency minus f01
    psi = np.zeros((detunings.size, levels), dtype=complex)
    psi[:, 0] = 1.0

    def deriv(psi_now, omega):
        # rotating frame of the drive; RWA couplings 0-1 and 1-2
        dpsi = np.empty_like(psi_now)
        half = 0.5 * omega
        if levels == 2:
            dpsi[:, 0] = half * psi_now[:, 1]
            dpsi[:, 1] = half * psi_now[:, 0] + (-detunings) * psi_now[:, 1]
        else:
            s2 = math.sqrt(2.0)
            dpsi[:, 0] = half * psi_now[:, 1]
            dpsi[:, 1] = (
                half * psi_now[:, 0]
                + (-detunings) * psi_now[:, 1]
                + s2 * half * psi_now[:, 2]
            )
            dpsi[:, 2] = (
                s2 * half * psi_now[:, 1]
                + (-2.0 * detunings + anharm) * psi_now[:, 2]
            )
        return -2j * np.pi * dpsi

    for k in range(t.size):
        # RK4 with the envelope sampled at the midpoint for the inner stages
        om0 = envelope[k]
        omm = omega_pk * math.exp(-0.5 * ((t[k] + 0.5 * dt) / sigma_drive) ** 2)
        om1 = omega_pk * math.exp(-0.5 * ((t[k] + dt) / sigma_drive) ** 2)
        k1 = deriv(psi, om0)
        k2 = deriv(psi + 0.5 * dt * k1, omm)
        k3 = deriv(psi + 0.5 * dt * k2, omm)
        k4 = deriv(psi + dt * k3, om1)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    pop = np.abs(psi[:, 1]) ** 2
    guess = (pop.max() - pop.min(), float(detunings[np.argmax(pop)]),
             1.0 / (2.0 * math.pi * sigma_drive), pop.min())
    try:
        popt, _ = curve_fit(_gaussian_line, detunings, pop, p0=guess, maxfev=10000)
    except RuntimeError as exc:
        raise FitConvergenceError(f"spectroscopy line fit failed: {exc}") from exc
    return float(popt[1])
