"""Short-time-scale calibration.

Fits a generic FIR model of the residual distortions directly through the
qubit frequency map (avoiding the ill-conditioned explicit inversion near
the flux-insensitive idle point) with Tikhonov and exponential-tail
regularizers, and designs a regularized inverse FIR whose cascade with
the fitted kernel approximates a narrow Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import defaults
from .errors import FitConvergenceError, NumericError, ValidationError
from .lti import FirKernel, Waveform, gaussian_smooth
from .simulator import FrequencyTrace
from .transmon import FrequencyModel, nu

_DNU_STEP = 1e-5  # flux step for the central-difference slope of nu


@dataclass(frozen=True)
class FirFitConfig:
    """Forward-model fit: tap count, regularizer weights, tail scale."""

    taps: int = defaults.FIR_TAPS
    lambda1: float = defaults.FIR_LAMBDA1
    lambda2: float = defaults.FIR_LAMBDA2
    tail_growth: float = defaults.FIR_TAIL_GROWTH_S
    max_iter: int = 100

    def __post_init__(self):
        if self.taps < 1:
            raise ValidationError("need at least one tap")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValidationError("regularizer weights must be >= 0")
        if not self.tail_growth > 0:
            raise ValidationError("tail growth time constant must be > 0")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")


@dataclass(frozen=True)
class InverseFirConfig:
    """Inverse design: tap count, Dirac-proxy width, Sobolev weight."""

    taps: int = defaults.FIR_INV_TAPS
    target_sigma: float = defaults.FIR_INV_TARGET_SIGMA_S
    target_center_index: int | None = None
    lambda1: float = defaults.FIR_INV_LAMBDA1

    def __post_init__(self):
        if self.taps < 1:
            raise ValidationError("need at least one tap")
        if not self.target_sigma > 0:
            raise ValidationError("target width must be > 0")
        if self.lambda1 < 0:
            raise ValidationError("Sobolev weight must be >= 0")
        if self.target_center_index is not None and self.target_center_index < 0:
            raise ValidationError("target center index must be >= 0")


@dataclass(frozen=True)
class FirFitResult:
    """Fitted kernel plus the objective decomposition at the solution."""

    kernel: FirKernel
    objective: tuple[float, ...]
    data_term: float
    tikhonov_term: float
    tail_term: float

    @property
    def total(self) -> float:
        return self.data_term + self.tikhonov_term + self.tail_term


def probe_waveform(
    amplitude: float,
    duration: float,
    ts: float,
    sigma_fp: float = defaults.SIGMA_FP_S,
) -> Waveform:
    """Gaussian-filtered rectangular probe pulse, aligned like the
    cryoscope program (pulse starts at t = 0, zero-padded both sides)."""
    lead = round(5.0 * sigma_fp / ts) + 4
    n_on = round(duration / ts)
    if n_on < 1:
        raise ValidationError("probe pulse must span at least one sample")
    program = np.zeros(lead + n_on + lead)
    program[lead : lead + n_on] = amplitude
    return gaussian_smooth(Waveform(program, ts, t0=-lead * ts), sigma_fp)


def fir_design_matrix(t, a: Waveform, taps: int) -> np.ndarray:
    """Sampled convolution operator: A[k, l] = a(t_k - l ts), linearly
    interpolated between AWG samples and zero outside the support."""
    t = np.asarray(t, dtype=float)
    query = t[:, None] - a.ts * np.arange(taps)[None, :]
    flat = np.interp(query.ravel(), a.times, a.samples, left=0.0, right=0.0)
    return flat.reshape(query.shape)


def _slope(model: FrequencyModel, phi: np.ndarray) -> np.ndarray:
    return (nu(model, phi + _DNU_STEP) - nu(model, phi - _DNU_STEP)) / (
        2.0 * _DNU_STEP
    )


def _weights(trace: FrequencyTrace) -> np.ndarray:
    w = np.asarray(trace.t_int, dtype=float)
    if np.all(w == 0):
        return np.ones(w.size)
    return w / w.mean()


def _tail_profile(cfg: FirFitConfig, ts: float) -> np.ndarray:
    return np.exp(np.arange(cfg.taps) * ts / cfg.tail_growth)


def data_term_and_gradient(
    trace: FrequencyTrace,
    a: Waveform,
    model: FrequencyModel,
    h: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Weighted data misfit sum w (f - nu(A h))^2 and its analytic
    gradient through the frequency map."""
    h = np.asarray(h, dtype=float)
    A = fir_design_matrix(trace.t, a, h.size)
    w = _weights(trace)
    phi = A @ h
    r = trace.f01 - nu(model, phi)
    value = float(np.sum(w * r * r))
    grad = -2.0 * (A.T @ (w * r * _slope(model, phi)))
    return value, grad


def fit_fir_forward(
    trace: FrequencyTrace,
    a: Waveform,
    model: FrequencyModel,
    cfg: FirFitConfig | None = None,
) -> FirFitResult:
    """Fit the FIR model of the effective line response to a measured
    frequency trace by damped Gauss-Newton.

    The probe waveform must be the one the AWG actually emitted (already
    Gaussian-filtered); the model maps tap coefficients to frequencies
    via nu(h * a) resampled at the measured times, so no explicit
    inversion of nu is performed. Samples are weighted by their
    effective integration time.
    """
    cfg = cfg if cfg is not None else FirFitConfig()
    if trace.t[0] < a.t0 or trace.t[-1] > a.times[-1]:
        raise ValidationError("trace times fall outside the probe support")
    A = fir_design_matrix(trace.t, a, cfg.taps)
    w = _weights(trace)
    sqrt_w = np.sqrt(w)
    lam2x = cfg.lambda2 * _tail_profile(cfg, a.ts)
    sqrt_r1 = math.sqrt(cfg.lambda1) * np.eye(cfg.taps)
    sqrt_r2 = np.diag(np.sqrt(lam2x))

    def objective(h):
        r = trace.f01 - nu(model, A @ h)
        return (
            float(np.sum(w * r * r)),
            cfg.lambda1 * float(h @ h),
            float((lam2x * h) @ h),
        )

    h = np.zeros(cfg.taps)
    h[0] = 1.0
    parts = objective(h)
    total = sum(parts)
    history = [total]
    converged = False
    for _ in range(cfg.max_iter):
        phi = A @ h
        resid = np.concatenate([
            sqrt_w * (trace.f01 - nu(model, phi)),
            math.sqrt(cfg.lambda1) * h,
            np.sqrt(lam2x) * h,
        ])
        jac = np.vstack([
            -sqrt_w[:, None] * _slope(model, phi)[:, None] * A,
            sqrt_r1,
            sqrt_r2,
        ])
        step = np.linalg.lstsq(jac, -resid, rcond=None)[0]
        beta = 1.0
        new_total = None
        while beta >= 1e-10:
            cand = h + beta * step
            cand_total = sum(objective(cand))
            if cand_total < total:
                new_total = cand_total
                break
            beta *= 0.5
        if new_total is None:
            # no descent along the Gauss-Newton direction: stationary
            converged = True
            break
        h = h + beta * step
        gain = total - new_total
        total = new_total
        history.append(total)
        if gain <= 1e-12 * max(total, 1.0):
            converged = True
            break
    if not converged:
        raise FitConvergenceError(
            f"objective still decreasing after {cfg.max_iter} iterations",
            history=history,
        )
    data, r1, r2 = objective(h)
    return FirFitResult(FirKernel(h, a.ts), tuple(history), data, r1, r2)


def design_inverse_fir(
    h: FirKernel, cfg: InverseFirConfig | None = None
) -> FirKernel:
    """Regularized deconvolution: the inverse kernel whose cascade with h
    best matches a narrow Gaussian, rescaled to unit cascade DC gain.

    Solved in closed form from the normal equations of the convolution
    operator with a first-difference Sobolev penalty.
    """
    cfg = cfg if cfg is not None else InverseFirConfig()
    coeffs = h.coeffs
    if cfg.taps < coeffs.size:
        raise ValidationError(
            "inverse needs at least as many taps as the forward kernel"
        )
    if not np.any(coeffs != 0):
        raise ValidationError("forward kernel is identically zero")
    n_out = coeffs.size + cfg.taps - 1
    C = np.zeros((n_out, cfg.taps))
    for j in range(cfg.taps):
        C[j : j + coeffs.size, j] = coeffs
    center = cfg.target_center_index
    if center is None:
        center = int(np.argmax(np.abs(coeffs)))
    if center >= n_out:
        raise ValidationError("target center index beyond the cascade length")
    k = np.arange(n_out)
    d = np.exp(-0.5 * (((k - center) * h.ts) / cfg.target_sigma) ** 2)

    diff = np.diff(np.eye(cfg.taps), axis=0)
    m = C.T @ C + cfg.lambda1 * (diff.T @ diff)
    rhs = C.T @ d
    if np.linalg.cond(m) > 1e14:
        raise NumericError(
            "inverse design normal matrix is singular; the Sobolev weight "
            "lambda1 must be > 0 for this kernel"
        )
    x = np.linalg.solve(m, rhs)
    # a couple of refinement passes keep the normal-equation residual tiny
    # even when lambda1 pushes the conditioning up by orders of magnitude
    for _ in range(2):
        x += np.linalg.solve(m, rhs - m @ x)
    rhs_norm = np.linalg.norm(rhs)
    check = np.linalg.norm(m @ x - rhs) / rhs_norm
    # evaluating m @ x already rounds at eps * |m| * |x|, so the residual
    # cannot be pushed below that no matter how exact the solve is
    eval_floor = (
        8 * np.finfo(float).eps * np.linalg.norm(m) * np.linalg.norm(x) / rhs_norm
    )
    if check > max(1e-10, eval_floor):
        raise NumericError(
            f"normal equations solved to {check:.2e} relative residual only"
        )
    scale = float(np.sum(coeffs) * np.sum(x))
    if abs(scale) < 1e-300:
        raise NumericError("cascade DC gain vanishes; cannot normalize")
    return FirKernel(x / scale, h.ts)


def second_pass(
    trace_with_fir: FrequencyTrace,
    a: Waveform,
    model: FrequencyModel,
    fit_cfg: FirFitConfig | None = None,
    inv_cfg: InverseFirConfig | None = None,
) -> tuple[FirFitResult, FirKernel]:
    """Refit the residual distortions measured with the first inverse FIR
    active and design the second inverse; the returned kernel belongs at
    the end of the predistortion chain (IIRs, first FIR, second FIR)."""
    fit = fit_fir_forward(trace_with_fir, a, model, fit_cfg)
    return fit, design_inverse_fir(fit.kernel, inv_cfg)


def dirac_deviation_energy(kernel: FirKernel) -> float:
    """Energy of the kernel's deviation from an ideal pass-through tap."""
    dev = kernel.coeffs.copy()
    dev[0] -= 1.0
    return float(dev @ dev)


def off_center_energy(kernel: FirKernel) -> float:
    """Fraction of the kernel's energy held outside its largest tap."""
    e = kernel.coeffs**2
    return float(1.0 - e.max() / e.sum())
