"""Ground-truth flux line and virtual characterization experiments.

The simulator owns the distortion chain that the calibration is supposed
to find, and produces the two kinds of raw data the paper's measurements
produce: spectroscopy population grids (long time scales) and cryoscope
frequency traces (short time scales), with matching noise statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import defaults
from .errors import ConfigurationError, ValidationError
from .lti import (
    ExponentialStepModel,
    FilterChain,
    FirKernel,
    Waveform,
    apply_chain,
    gaussian_smooth,
    one_pole_lowpass_kernel,
    realize_step_invariant,
)
from .transmon import FrequencyModel, nu


@dataclass(frozen=True)
class DistortionScenario:
    """Configurable ground-truth distortion of the flux control line.

    long_time is the sum-of-exponentials step-response model, short_time a
    convolution kernel for nanosecond-scale distortions, echoes a set of
    (amplitude, delay) reflection taps. Any part may be absent.
    """

    long_time: ExponentialStepModel | None = None
    short_time: FirKernel | None = None
    echoes: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "echoes", tuple((float(a), float(d)) for a, d in self.echoes)
        )
        for amp, delay in self.echoes:
            if not (math.isfinite(amp) and math.isfinite(delay)) or delay < 0:
                raise ValidationError(f"bad echo tap ({amp}, {delay})")


@dataclass(frozen=True)
class NoiseConfig:
    """Measurement noise model.

    n_r = 0 is the infinite-averaging limit (no readout noise).
    sigma_theta_rad and sigma_floor_hz are the calibrated extra phase
    jitter and frequency floor of the cryoscope; sigma_p_extra is the
    extra population scatter of the spectroscopy readout.
    """

    n_r: int = defaults.SPEC_N_R
    n_theta: int = defaults.CRYO_N_THETA
    seed: int = 0
    sigma_floor_hz: float = 0.0
    sigma_theta_rad: float = 0.0
    sigma_p_extra: float = 0.0

    def __post_init__(self):
        if self.n_r < 0:
            raise ValidationError("n_r must be >= 1 (0 disables readout noise)")
        if self.n_theta < 4:
            raise ValidationError("need at least 4 readout phases")
        if self.seed < 0 or self.seed > 2**64 - 1:
            raise ValidationError("seed must fit in 64 bits")
        for name in ("sigma_floor_hz", "sigma_theta_rad", "sigma_p_extra"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")


def default_spec_noise(seed: int = 0) -> NoiseConfig:
    return NoiseConfig(
        n_r=defaults.SPEC_N_R, seed=seed, sigma_p_extra=defaults.SIGMA_P_EXTRA
    )


def default_cryo_noise(seed: int = 0) -> NoiseConfig:
    return NoiseConfig(
        n_r=defaults.CRYO_N_R,
        n_theta=defaults.CRYO_N_THETA,
        seed=seed,
        sigma_floor_hz=defaults.SIGMA_F_FLOOR_HZ,
        sigma_theta_rad=defaults.SIGMA_THETA_EXTRA_RAD,
    )


@dataclass(frozen=True)
class CryoscopeSchedule:
    """Time windows with per-window truncation step dt = mult * ts."""

    windows: tuple[tuple[tuple[float, float], int], ...]

    def __post_init__(self):
        wins = tuple(
            ((float(a), float(b)), int(m)) for (a, b), m in self.windows
        )
        object.__setattr__(self, "windows", wins)
        prev_end = -math.inf
        for (a, b), m in wins:
            if m < 1:
                raise ConfigurationError("dt must be at least one sample")
            if not a < b:
                raise ValidationError(f"empty schedule window ({a}, {b})")
            if a < prev_end:
                raise ValidationError("schedule windows overlap or are unordered")
            prev_end = b

    def sample_pairs(self, ts: float) -> list[tuple[int, int]]:
        """Truncation index pairs (k1, k2) with k2 - k1 = mult per window."""
        pairs = []
        for (a, b), m in self.windows:
            center = a
            while center <= b + 1e-15:
                k1 = round(center / ts - m / 2.0)
                pairs.append((k1, k1 + m))
                center += m * ts
        return pairs


def default_cryoscope_schedule(
    duration: float = defaults.CRYO_PULSE_DURATION_S,
    ts: float = defaults.TS,
    edge_margin: float = 0.0,
) -> CryoscopeSchedule:
    """Fine steps at both pulse edges, medium after the first edge, coarse
    in the bulk. Every truncation pair stays inside the programmed pulse:
    truncating at or beyond the pulse end reproduces the full pulse, so
    pairs out there would measure nothing but the idle frequency.

    ``edge_margin`` pulls the fine windows away from the pulse edges.  The
    most extreme truncations land the turn-off transient right on top of a
    frequency step, which is where the method's non-LTI systematics live;
    skipping the last ~1 ns on each side keeps those points out of fits
    that assume an LTI response."""
    e = 2.4e-9
    return CryoscopeSchedule(
        (
            ((max(0.5 * ts, edge_margin), e), 1),
            ((e + ts, 30e-9), 3),
            ((30e-9 + ts, duration - e - ts), 8),
            ((duration - e, min(duration - 0.5 * ts, duration - edge_margin)), 1),
        )
    )


@dataclass(frozen=True)
class FrequencyTrace:
    """Measured qubit frequency versus time with per-point statistics."""

    t: np.ndarray
    f01: np.ndarray
    sigma_f: np.ndarray
    t_int: np.ndarray

    def __post_init__(self):
        for name in ("t", "f01", "sigma_f", "t_int"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.t.size
        if any(getattr(self, k).size != n for k in ("f01", "sigma_f", "t_int")):
            raise ValidationError("trace columns differ in length")
        if n == 0:
            raise ValidationError("empty trace")
        if np.any(np.diff(self.t) <= 0):
            raise ValidationError("trace times must be strictly increasing")
        if np.any(self.sigma_f < 0) or np.any(self.t_int < 0):
            raise ValidationError("sigma_f and t_int must be non-negative")

    def __len__(self):
        return self.t.size


@dataclass(frozen=True)
class SpectroscopyGrid:
    """Population versus (drive time, drive frequency)."""

    t: np.ndarray           # (nt,)
    f_drive: np.ndarray     # (nt, nf)
    population: np.ndarray  # (nt, nf)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        fd = np.asarray(self.f_drive, dtype=float)
        p = np.asarray(self.population, dtype=float)
        for arr in (t, fd, p):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "f_drive", fd)
        object.__setattr__(self, "population", p)
        if fd.shape != p.shape or fd.shape[0] != t.size or fd.ndim != 2:
            raise ValidationError("inconsistent grid shapes")


# ---------------------------------------------------------------------------
# line construction


def cascaded_lowpass_kernel(cutoffs_hz, ts: float) -> FirKernel:
    """Convolution of one-pole low-pass kernels at the given cutoffs."""
    coeffs = np.array([1.0])
    for fc in cutoffs_hz:
        k = one_pole_lowpass_kernel(fc, ts)
        coeffs = np.convolve(coeffs, k.coeffs)
    return FirKernel(coeffs, ts)


def build_line(s: DistortionScenario, ts: float) -> FilterChain:
    """Realize the scenario as a causal filter chain with unit plateau.

    The step response of the returned chain equals 1 at the plateau
    (after the short-time transients, before the long-time decay).
    """
    stages = []
    if s.long_time is not None:
        inst = s.long_time.instantaneous
        if abs(inst) < 1e-9:
            raise ConfigurationError(
                "long-time model has (near) zero instantaneous response; "
                "cannot normalize the plateau"
            )
        cascade = realize_step_invariant(s.long_time, ts)
        stages.append(
            type(cascade)(cascade.sections, cascade.gain / inst, ts)
        )
    if s.short_time is not None:
        if s.short_time.ts != ts:
            raise ConfigurationError("short-time kernel has a different ts")
        total = float(np.sum(s.short_time.coeffs))
        if abs(total) < 1e-9:
            raise ConfigurationError("short-time kernel has (near) zero DC gain")
        stages.append(FirKernel(s.short_time.coeffs / total, ts))
    if s.echoes:
        n = max(round(d / ts) for _, d in s.echoes) + 1
        coeffs = np.zeros(n)
        coeffs[0] = 1.0
        for amp, delay in s.echoes:
            coeffs[round(delay / ts)] += amp
        stages.append(FirKernel(coeffs / coeffs.sum(), ts))
    return FilterChain(tuple(stages))


def paper_like_scenario(ts: float = defaults.TS) -> DistortionScenario:
    return DistortionScenario(
        long_time=defaults.paper_like_model(),
        short_time=cascaded_lowpass_kernel(defaults.SCENARIO_LOWPASS_CUTOFFS_HZ, ts),
    )


# ---------------------------------------------------------------------------
# waveforms


def rectangular_pulse(amplitude: float, duration: float, ts: float) -> Waveform:
    """Unsmoothed rectangle on [0, duration), one trailing zero sample."""
    n = round(duration / ts)
    if n < 1:
        raise ValidationError("pulse shorter than one sample")
    samples = np.zeros(n + 1)
    samples[:n] = amplitude
    return Waveform(samples, ts)


def _chain(predistortion: FilterChain | None) -> FilterChain:
    return predistortion if predistortion is not None else FilterChain(())


# ---------------------------------------------------------------------------
# virtual experiments


def oracle_frequency_trace(
    line: FilterChain, awg: Waveform, model: FrequencyModel
) -> FrequencyTrace:
    """Noiseless frequency trace: f01(t) = nu(flux through the line)."""
    phi = apply_chain(line, awg)
    f01 = nu(model, phi.samples)
    zeros = np.zeros_like(f01)
    return FrequencyTrace(phi.times, f01, zeros, zeros)


def _point_rng(noise: NoiseConfig, *idx: int):
    return np.random.default_rng((noise.seed, *idx))


def default_time_grid() -> np.ndarray:
    return np.geomspace(
        defaults.SPEC_T_MIN_S, defaults.SPEC_T_MAX_S, defaults.SPEC_N_TIMES
    )


def run_spectroscopy(
    line: FilterChain,
    predistortion: FilterChain | None,
    model: FrequencyModel,
    t_grid=None,
    f_window: float = defaults.SPEC_F_WINDOW_HZ,
    noise: NoiseConfig | None = None,
    n_freq: int = defaults.SPEC_N_FREQ,
    a_step: float = defaults.SPEC_STEP_PHI0,
    sigma_drive: float = defaults.SIGMA_DRIVE_S,
    sigma_fp: float = defaults.SIGMA_FP_S,
    t_fl: float = defaults.T_FL_S,
    t_ro: float = defaults.T_RO_S,
    ro_comp_tau: float = defaults.RO_COMP_TAU_S,
) -> SpectroscopyGrid:
    """Pulsed-spectroscopy sweep of drive time and drive frequency.

    Per drive time t the full flux sequence is simulated: a smoothed step,
    truncation at t + t_fl, a model-based compensation level during
    readout (only while no predistortion is active), end of the waveform
    at t + t_ro. The excited-state population follows the analytic
    Gaussian line shape around the envelope-averaged f01 plus the
    configured spectroscopy offset, with binomial readout noise.
    """
    ts = line.ts or defaults.TS
    if t_ro <= t_fl:
        raise ConfigurationError("readout must come after the flux truncation")
    if t_grid is None:
        t_grid = default_time_grid()
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or n_freq < 5:
        raise ConfigurationError("empty sweep grid")
    noise = noise if noise is not None else NoiseConfig()
    pre = _chain(predistortion)

    sigma_df = 1.0 / (2.0 * math.pi * sigma_drive)
    lead = round(3.0 * sigma_drive / ts)
    f_drive = np.empty((t_grid.size, n_freq))
    population = np.empty_like(f_drive)

    for ti, t in enumerate(t_grid):
        n_trunc = lead + round((t + t_fl) / ts)
        n_total = lead + round((t + t_ro) / ts) + 1
        program = np.zeros(n_total)
        program[lead:n_trunc] = a_step
        if len(pre.stages) == 0:
            program[n_trunc:] = a_step * -math.expm1(-(t + t_fl) / ro_comp_tau)
        w = gaussian_smooth(Waveform(program, ts, t0=-lead * ts), sigma_fp)
        phi = apply_chain(line, apply_chain(pre, w))

        i0 = lead + round((t - 2.0 * sigma_drive) / ts)
        i1 = lead + round((t + 2.0 * sigma_drive) / ts)
        window = slice(max(i0, 0), i1 + 1)
        times = w.times[window]
        env = np.exp(-0.5 * ((times - t) / sigma_drive) ** 2)
        f01 = nu(model, phi.samples[window])
        center = float(np.sum(env * f01) / np.sum(env)) + model.spec_shift

        fd = center + np.linspace(-f_window, f_window, n_freq)
        p = np.exp(-((fd - center) ** 2) / (2.0 * sigma_df**2))
        if noise.n_r > 0 or noise.sigma_p_extra > 0:
            var = noise.sigma_p_extra**2 * np.ones_like(p)
            if noise.n_r > 0:
                var = var + p * (1.0 - p) / noise.n_r
            for fi in range(n_freq):
                p[fi] += _point_rng(noise, 1, ti, fi).normal(0.0, math.sqrt(var[fi]))
            np.clip(p, 0.0, 1.0, out=p)
        f_drive[ti] = fd
        population[ti] = p

    return SpectroscopyGrid(t_grid, f_drive, population)


def _cosine_phase_estimate(populations: np.ndarray, phases: np.ndarray) -> float:
    """Phase of p = c0 + (A/2) cos(theta - phase), exact LSQ on a uniform
    phase grid."""
    c1 = 2.0 * np.mean(populations * np.cos(phases))
    c2 = 2.0 * np.mean(populations * np.sin(phases))
    return math.atan2(c2, c1)


def run_cryoscope(
    line: FilterChain,
    predistortion: FilterChain | None,
    model: FrequencyModel,
    pulse: Waveform,
    sched: CryoscopeSchedule,
    noise: NoiseConfig | None = None,
    sigma_fp: float = defaults.SIGMA_FP_S,
    readout_margin: float = defaults.CRYO_READOUT_MARGIN_S,
) -> FrequencyTrace:
    """Ramsey-phase estimate of the frequency excursion during a flux pulse.

    For each scheduled time the pulse program is truncated at the two
    sample indices (k1, k2), each variant is smoothed, predistorted, and
    sent through the line, and the dynamic phase is integrated up to a
    fixed readout time (including turn-off transients, which is what
    produces the method's edge systematics). The frequency estimate is
    the phase difference divided by 2 pi dt; phase wrapping is resolved
    against the undistorted target pulse.
    """
    ts = pulse.ts
    if line.ts is not None and line.ts != ts:
        raise ConfigurationError("pulse and line sampling intervals differ")
    noise = noise if noise is not None else NoiseConfig(n_r=defaults.CRYO_N_R)
    pre = _chain(predistortion)
    f_idle = nu(model, 0.0)
    phases = 2.0 * math.pi * np.arange(noise.n_theta) / noise.n_theta

    pairs = sched.sample_pairs(ts)
    lead = round(5.0 * sigma_fp / ts) + 4
    n_ro = pulse.samples.size + round(readout_margin / ts)

    def dynamic_phase(k_trunc: int, chain_pre: FilterChain, use_line: bool) -> float:
        program = np.zeros(n_ro + lead)
        keep = min(max(k_trunc, 0), pulse.samples.size)
        program[lead : lead + keep] = pulse.samples[:keep]
        w = gaussian_smooth(Waveform(program, ts, t0=-lead * ts), sigma_fp)
        v = apply_chain(chain_pre, w)
        phi = apply_chain(line, v) if use_line else v
        f01 = nu(model, phi.samples)
        return 2.0 * math.pi * ts * float(np.sum(f01 - f_idle))

    identity = FilterChain(())
    t_out, f_out, sf_out, ti_out = [], [], [], []
    for pi, (k1, k2) in enumerate(pairs):
        dt = (k2 - k1) * ts
        theta = []
        theta_ref = []
        for j, k in enumerate((k1, k2)):
            th = dynamic_phase(k, pre, True)
            theta_ref.append(dynamic_phase(k, identity, False))
            if noise.n_r > 0 or noise.sigma_theta_rad > 0 or noise.sigma_floor_hz > 0:
                rng = _point_rng(noise, 2, pi, j)
                th_n = th + rng.normal(0.0, noise.sigma_theta_rad)
                p = 0.5 * (1.0 + np.cos(th_n - phases))
                if noise.n_r > 0:
                    p = p + rng.normal(0.0, 1.0, p.size) * np.sqrt(
                        p * (1.0 - p) / noise.n_r
                    )
                    np.clip(p, 0.0, 1.0, out=p)
                th = _cosine_phase_estimate(p, phases)
            theta.append(th)
        d_raw = theta[1] - theta[0]
        d_ref = theta_ref[1] - theta_ref[0]
        d_theta = d_raw + 2.0 * math.pi * round((d_ref - d_raw) / (2.0 * math.pi))
        f_est = f_idle + d_theta / (2.0 * math.pi * dt)
        if noise.sigma_floor_hz > 0:
            f_est += _point_rng(noise, 3, pi).normal(0.0, noise.sigma_floor_hz)

        # Exact LSQ phase variance on a uniform phase grid with binomial
        # readout noise is 3/(2 n_theta n_r), independent of the phase.
        if noise.n_r > 0:
            sig_th2 = 1.5 / (noise.n_theta * noise.n_r) + noise.sigma_theta_rad**2
            t_int = dt * math.sqrt(noise.n_theta * noise.n_r)
        else:
            sig_th2 = noise.sigma_theta_rad**2
            t_int = dt
        sigma_f = math.sqrt(
            2.0 * sig_th2 / (2.0 * math.pi * dt) ** 2 + noise.sigma_floor_hz**2
        )
        t_out.append(0.5 * (k1 + k2) * ts)
        f_out.append(f_est)
        sf_out.append(sigma_f)
        ti_out.append(t_int)

    return FrequencyTrace(
        np.array(t_out), np.array(f_out), np.array(sf_out), np.array(ti_out)
    )
