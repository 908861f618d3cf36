"""Long-time-scale calibration.

Turns spectroscopy population grids into frequency traces, converts them
to normalized step-response samples through the frequency model, fits the
sum-of-exponentials step response with an iterative order-raising
schedule, designs the normalized inverse IIR filter, and provides the
postdistortion consistency check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import curve_fit, least_squares

from . import defaults
from .errors import (
    ConfigurationError,
    DomainError,
    FitConvergenceError,
    ValidationError,
)
from .lti import (
    ExponentialStepModel,
    SosCascade,
    Waveform,
    apply_sos,
    discretize_roots,
    pair_into_sos,
    transfer_function_roots,
)
from .simulator import FrequencyTrace, SpectroscopyGrid
from .transmon import FrequencyModel, nu, nu_inverse


@dataclass(frozen=True)
class SpectralLineFit:
    """Gaussian line fit of one spectroscopy time slice."""

    center: float
    width: float
    amplitude: float
    offset: float
    center_stderr: float

    def __post_init__(self):
        if not all(
            math.isfinite(v)
            for v in (self.center, self.width, self.amplitude, self.offset,
                      self.center_stderr)
        ):
            raise ValidationError("non-finite line-fit parameter")
        if self.width <= 0 or self.center_stderr < 0:
            raise ValidationError("line fit needs width > 0 and stderr >= 0")


def _gauss(f, amp, center, width, offset):
    return amp * np.exp(-((f - center) ** 2) / (2.0 * width**2)) + offset


def fit_spectral_line(f_drive, population) -> SpectralLineFit:
    """Least-squares Gaussian fit of a single population slice.

    The center standard error comes from the covariance scaled by the fit
    residual variance.
    """
    fd = np.asarray(f_drive, dtype=float)
    p = np.asarray(population, dtype=float)
    if fd.size != p.size or fd.size < 5:
        raise ValidationError("need at least 5 frequency points per slice")
    span = fd[-1] - fd[0]
    p0 = (p.max() - p.min(), fd[np.argmax(p)], abs(span) / 6.0, p.min())
    try:
        popt, pcov = curve_fit(_gauss, fd, p, p0=p0, maxfev=10000)
    except RuntimeError as exc:
        raise FitConvergenceError(f"line fit did not converge: {exc}") from exc
    amp, center, width, offset = popt
    stderr = float(np.sqrt(max(pcov[1, 1], 0.0)))
    if not math.isfinite(stderr) or abs(width) > 2 * abs(span):
        raise FitConvergenceError("degenerate line fit")
    return SpectralLineFit(float(center), abs(float(width)), float(amp),
                           float(offset), stderr)


def fit_spectral_lines(grid: SpectroscopyGrid) -> FrequencyTrace:
    """Per-slice line fits; slices that fail to converge are dropped."""
    ts_kept, centers, errs = [], [], []
    for ti in range(grid.t.size):
        try:
            fit = fit_spectral_line(grid.f_drive[ti], grid.population[ti])
        except FitConvergenceError as exc:
            warnings.warn(
                f"dropping spectroscopy slice at t = {grid.t[ti]:.3e} s: {exc}"
            )
            continue
        ts_kept.append(grid.t[ti])
        centers.append(fit.center)
        errs.append(fit.center_stderr)
    if not ts_kept:
        raise FitConvergenceError("no spectroscopy slice could be fitted")
    n = len(ts_kept)
    return FrequencyTrace(
        np.array(ts_kept), np.array(centers), np.array(errs), np.zeros(n)
    )


@dataclass(frozen=True)
class StepResponseSamples:
    """Normalized flux step response: s(t) with s = 1 at the extremum."""

    t: np.ndarray
    s: np.ndarray
    phi_peak: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        s = np.asarray(self.s, dtype=float)
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "s", s)
        if t.size != s.size or t.size == 0:
            raise ValidationError("mismatched step-response arrays")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly increasing")
        if self.phi_peak == 0 or not math.isfinite(self.phi_peak):
            raise ValidationError("zero or non-finite normalization flux")


def extract_step_response(
    trace: FrequencyTrace, model: FrequencyModel, branch: tuple[float, float]
) -> StepResponseSamples:
    """Invert frequencies to flux and normalize by the signed extremum.

    The model's spectroscopy offset is subtracted before inversion, so a
    trace of cryoscope data should come with a model whose spec_shift is
    zero.
    """
    phi = np.empty(trace.t.size)
    for i, f in enumerate(trace.f01):
        try:
            phi[i] = nu_inverse(model, f - model.spec_shift, branch)
        except DomainError as exc:
            raise DomainError(
                f"trace sample {i} (t = {trace.t[i]:.4e} s, f = {f:.6e} Hz) "
                f"is outside the invertible branch: {exc}"
            ) from exc
    peak = phi[np.argmax(np.abs(phi))]
    return StepResponseSamples(trace.t, phi / peak, float(peak))


def default_rms_floor(
    trace: FrequencyTrace,
    samples: StepResponseSamples,
    model: FrequencyModel,
    eps: float = 1e-5,
) -> float:
    """Early-stop floor for the exponential fit.

    Twice the median per-point frequency uncertainty, converted to
    normalized flux units through the local slope of nu. Zero for a
    noiseless trace, which disables the early stop.
    """
    if trace.t.size != samples.t.size:
        raise ValidationError("trace and samples must have matching length")
    phi = samples.s * samples.phi_peak
    slope = (nu(model, phi + eps) - nu(model, phi - eps)) / (2.0 * eps)
    if np.any(slope == 0):
        raise ValidationError("nu slope vanishes at a sample; cannot "
                              "convert sigma_f to flux units")
    sigma_phi = trace.sigma_f / np.abs(slope)
    return float(2.0 * np.median(sigma_phi) / abs(samples.phi_peak))


@dataclass(frozen=True)
class ExpFitSchedule:
    """Iterative fit schedule: per added term, the window start and the
    initial time constant. alpha0 is held fixed at the given value."""

    steps: tuple[tuple[float, float], ...]
    alpha0: float = 0.0

    def __post_init__(self):
        steps = tuple((float(a), float(b)) for a, b in self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise ValidationError("schedule needs at least one step")
        for t_min, tau in steps:
            if tau <= 0 or t_min < 0:
                raise ValidationError("schedule entries must be positive")
        t_mins = [a for a, _ in steps]
        if any(b >= a for a, b in zip(t_mins, t_mins[1:])):
            raise ValidationError("window starts must strictly decrease")
        if not math.isfinite(self.alpha0):
            raise ValidationError("alpha0 must be finite")


def default_fit_schedule(repass: bool = False) -> ExpFitSchedule:
    steps = defaults.EXP_FIT_SCHEDULE_REPASS if repass \
        else defaults.EXP_FIT_SCHEDULE_FIRST
    return ExpFitSchedule(steps, alpha0=1.0 if repass else 0.0)


@dataclass(frozen=True)
class IirFitResult:
    """Fitted model plus the fit report."""

    model: ExponentialStepModel
    residual_rms: float
    iteration_rms: tuple[float, ...]
    term_stderr: tuple[tuple[float, float], ...]
    notes: tuple[str, ...]


def _model_terms(x: np.ndarray, n: int):
    # clamp log-tau so a wandering LM step cannot overflow exp; the range
    # is far outside any physical time constant
    return x[:n], np.exp(np.clip(x[n:], -80.0, 80.0))


def fit_exponential_sum(
    samples: StepResponseSamples,
    sched: ExpFitSchedule,
    rms_floor: float | None = None,
) -> IirFitResult:
    """Fit alpha0 + sum_i alpha_i exp(-t/tau_i) by raising the order.

    Iteration N fits terms 1..N to the samples at t >= t_min_N; earlier
    terms start from their previous estimates, the new term starts at
    amplitude 1 with the scheduled time constant. alpha0 stays fixed at
    the schedule's value. The early-stop floor is checked against the
    residual over the full fit domain (t >= the smallest window start),
    not the current iteration's window, so structure below the current
    t_min still forces another term. If an iteration diverges the
    previous model is returned with a warning note.
    """
    t, s = samples.t, samples.s
    if t[0] <= 0:
        raise ValidationError("step-response samples must start at t > 0")
    if t[-1] / t[0] < 100.0:
        raise ValidationError("samples must cover at least two decades")

    alpha0 = sched.alpha0
    full = t >= sched.steps[-1][0]
    tf, sf = t[full], s[full]
    x = np.empty(0)
    notes: list[str] = []
    iteration_rms: list[float] = []
    last_good = None  # (x, n, window_rms, full_rms, jac, resid_size)

    for n, (t_min, tau_init) in enumerate(sched.steps, start=1):
        mask = t >= t_min
        if mask.sum() < 2 * n + 1:
            notes.append(
                f"iteration {n}: only {int(mask.sum())} samples at "
                f"t >= {t_min:.3e} s; stopping at order {n - 1}"
            )
            break
        tw, sw = t[mask], s[mask]
        x0 = np.concatenate([x[: n - 1], [1.0], x[n - 1:], [math.log(tau_init)]])

        def residual(p, tw=tw, sw=sw, n=n):
            a, tau = _model_terms(p, n)
            return alpha0 + np.exp(-tw[:, None] / tau) @ a - sw

        sol = least_squares(residual, x0, method="lm", xtol=1e-14, ftol=1e-14,
                            gtol=1e-14, max_nfev=4000)
        ok = sol.success and np.all(np.isfinite(sol.x))
        if ok and last_good is not None:
            # a higher-order fit that is much worse than its parent on its
            # own window means the optimizer ran away
            ok = 2 * sol.cost / tw.size < 100.0 * max(
                last_good[3] ** 2, 1e-30
            )
        if not ok:
            if last_good is None:
                raise FitConvergenceError(
                    "first fit iteration diverged", history=iteration_rms
                )
            notes.append(f"iteration {n} diverged; keeping order {n - 1}")
            warnings.warn(notes[-1])
            break
        window_rms = math.sqrt(2.0 * sol.cost / tw.size)
        full_rms = float(np.sqrt(np.mean(residual(sol.x, tf, sf, n) ** 2)))
        iteration_rms.append(full_rms)
        x = sol.x
        last_good = (x, n, window_rms, full_rms, sol.jac, tw.size)
        if rms_floor is not None and full_rms < rms_floor:
            notes.append(
                f"stopped at order {n}: residual rms {full_rms:.3e} "
                "below floor"
            )
            break

    if last_good is None:
        raise FitConvergenceError("no fit iteration succeeded",
                                  history=iteration_rms)
    x, n, rms, full_rms, jac, m = last_good
    a, tau = _model_terms(x, n)
    order = np.argsort(-tau)
    try:
        model = ExponentialStepModel(
            alpha0, tuple((a[i], tau[i]) for i in order)
        )
    except ValidationError as exc:
        raise FitConvergenceError(
            f"fitted time constants are degenerate: {exc}",
            history=iteration_rms,
        ) from exc

    # stderr from the Gauss-Newton covariance at the solution, scaled by
    # the residual variance; tau errors by the delta method through exp
    dof = max(m - x.size, 1)
    try:
        cov = np.linalg.inv(jac.T @ jac) * (rms**2 * m / dof)
        sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
        term_stderr = tuple(
            (float(sig[i]), float(sig[n + i] * tau[i])) for i in order
        )
    except np.linalg.LinAlgError:
        term_stderr = tuple((math.inf, math.inf) for _ in range(n))
        notes.append("singular fit covariance; stderr unavailable")

    return IirFitResult(model, full_rms, tuple(iteration_rms), term_stderr,
                        tuple(notes))


def design_inverse_iir(m: ExponentialStepModel, ts: float) -> SosCascade:
    """Normalized inverse of the model as a cascade of real sections.

    The inverse's zeros sit at the model's continuous poles p = -1/tau_i
    and its poles at the model's zeros (the roots of the numerator
    polynomial); both sets map to the z plane as exp(p ts). The gain makes
    the instantaneous response exactly 1, which realizes the inverse of
    the plateau-normalized model. A DC-blocking model (alpha0 = 0) yields
    the integrator section with its pole pinned at z = 1.
    """
    if not m.terms:
        raise ValidationError("model must have at least one exponential term")
    if ts <= 0:
        raise ValidationError("ts must be positive")
    zeros_p, poles_p, _ = transfer_function_roots(m)
    inv_poles = discretize_roots(zeros_p, ts)
    inv_zeros = discretize_roots(poles_p, ts)
    for i in range(inv_poles.size):
        for j in range(i + 1, inv_poles.size):
            if abs(inv_poles[i] - inv_poles[j]) < 1e-9:
                raise ConfigurationError(
                    "inverse filter has (near-)repeated poles; perturb the "
                    "fitted time constants (critically damped responses are "
                    "not representable by this model)"
                )
    return pair_into_sos(inv_zeros, inv_poles, 1.0, ts)


def postdistortion_check(
    raw_trace: FrequencyTrace,
    inv: SosCascade,
    model: FrequencyModel,
    branch: tuple[float, float],
) -> FrequencyTrace:
    """Apply the inverse filter to measured data instead of the AWG.

    The trace is converted to flux, resampled onto a uniform grid at the
    filter's ts (the flux before the first sample is held at its initial
    value, with the implied step at t = 0), filtered, sampled back at the
    trace times, and mapped through nu again. Only the filter's change to
    the signal rides through the grid interpolation; the unfiltered part
    is anchored at the measured nodes, so an identity filter returns the
    input trace exactly.
    """
    samples = extract_step_response(raw_trace, model, branch)
    phi = samples.s * samples.phi_peak
    ts = inv.ts
    grid = np.arange(0.0, raw_trace.t[-1] + ts, ts)
    inside = grid > raw_trace.t[0]
    phi_uniform = np.full(grid.size, phi[0])
    if raw_trace.t.size >= 4:
        # cubic resampling: the chord error of linear interpolation on a
        # log-spaced trace accumulates in the inverse's integrator. A
        # single-signed trace is near-exponential, so interpolating its
        # log is another order quieter; fall back to a plain spline when
        # the trace changes sign.
        if np.all(phi > 0) or np.all(phi < 0):
            sign = 1.0 if phi[0] > 0 else -1.0
            spline = CubicSpline(raw_trace.t, np.log(sign * phi))
            phi_uniform[inside] = sign * np.exp(spline(grid[inside]))
        else:
            phi_uniform[inside] = CubicSpline(raw_trace.t, phi)(grid[inside])
    else:
        phi_uniform[inside] = np.interp(grid[inside], raw_trace.t, phi)
    filtered = apply_sos(inv, Waveform(phi_uniform, ts))
    correction = np.interp(raw_trace.t, grid, filtered.samples - phi_uniform)
    f_post = nu(model, phi + correction) + model.spec_shift
    return FrequencyTrace(raw_trace.t, f_post, raw_trace.sigma_f,
                          raw_trace.t_int)
