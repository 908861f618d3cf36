"""Discrete-time LTI primitives for flux-line response modeling.

Everything here works on uniformly sampled real-valued signals.  Filters are
causal with zero initial state, so samples before a waveform's start time are
treated as zero.  Continuous-time response models are sums of decaying
exponentials (step response ``alpha0 + sum_i alpha_i exp(-t/tau_i)`` for
t >= 0); they are discretized either via the matched-z map z = exp(p*ts) or
via the step-invariant (zero-order-hold) construction, both ending up as
cascades of real second-order sections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal
from numpy.polynomial import polynomial as npoly

from .errors import ConfigurationError, NumericError, ValidationError

__all__ = [
    "Waveform",
    "ExponentialStepModel",
    "SosSection",
    "SosCascade",
    "FirKernel",
    "FilterChain",
    "convolve",
    "gaussian_smooth",
    "step_response_eval",
    "discretize_roots",
    "pair_into_sos",
    "apply_sos",
    "apply_fir",
    "apply_chain",
    "impulse_response",
    "step_response",
    "transfer_function_roots",
    "realize_matched_z",
    "realize_step_invariant",
    "one_pole_lowpass_kernel",
]

# Relative tolerance below which two time constants count as coincident.
_TAU_DISTINCT_RTOL = 1e-9
# |Im(root)| below this fraction of |root| is rounded away after polishing.
_IMAG_ROUND_RTOL = 1e-9
# Pole magnitude slack for float round-off in the stability check.
_STABILITY_SLACK = 1e-9
_UNIT_POLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Waveform:
    """Uniformly sampled real signal.

    :param samples: sample values (copied, stored read-only)
    :param ts: sample spacing in seconds
    :param t0: time of the first sample in seconds
    """

    samples: np.ndarray
    ts: float
    t0: float = 0.0

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("waveform needs a non-empty 1-d sample array")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("waveform samples must be finite")
        if not (self.ts > 0.0 and math.isfinite(self.ts)):
            raise ValidationError("waveform sample spacing must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.ts * np.arange(self.samples.size)

    def with_samples(self, samples) -> "Waveform":
        return Waveform(samples, self.ts, self.t0)

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; raises if t is off-grid or outside."""
        k = (t - self.t0) / self.ts
        ki = int(round(k))
        if abs(k - ki) > 1e-6:
            raise ConfigurationError(f"time {t} s is not on the sample grid")
        if not 0 <= ki < len(self):
            raise ConfigurationError(f"time {t} s is outside the waveform")
        return ki


@dataclass(frozen=True)
class ExponentialStepModel:
    """Continuous step-response model ``alpha0 + sum_i alpha_i exp(-t/tau_i)``.

    ``terms`` is a tuple of (alpha_i, tau_i) pairs with tau_i > 0 and pairwise
    distinct time constants.  ``alpha0`` is the settled (t -> inf) value; the
    instantaneous (t -> 0+) value is ``alpha0 + sum_i alpha_i``.
    """

    alpha0: float
    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        terms = tuple((float(a), float(t)) for a, t in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "alpha0", float(self.alpha0))
        vals = [self.alpha0] + [v for pair in terms for v in pair]
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("model coefficients must be finite")
        taus = sorted(t for _, t in terms)
        if any(t <= 0 for t in taus):
            raise ValidationError("time constants must be positive")
        for a, b in zip(taus, taus[1:]):
            if (b - a) <= _TAU_DISTINCT_RTOL * b:
                raise ValidationError(
                    f"time constants {a} and {b} coincide within {_TAU_DISTINCT_RTOL}"
                )

    @property
    def alphas(self) -> np.ndarray:
        return np.array([a for a, _ in self.terms])

    @property
    def taus(self) -> np.ndarray:
        return np.array([t for _, t in self.terms])

    @property
    def instantaneous(self) -> float:
        """Step-response value just after t = 0."""
        return self.alpha0 + sum(a for a, _ in self.terms)


def step_response_eval(model: ExponentialStepModel, times) -> np.ndarray:
    """Evaluate the model step response at ``times`` (zero for t < 0)."""
    t = np.asarray(times, dtype=float)
    out = np.full(t.shape, model.alpha0)
    for a, tau in model.terms:
        out = out + a * np.exp(-np.maximum(t, 0.0) / tau)
    return np.where(t >= 0.0, out, 0.0)


def impulse_response_eval(model: ExponentialStepModel, times) -> np.ndarray:
    """Analytic d/dt of the step response for t > 0 (no delta at 0)."""
    t = np.asarray(times, dtype=float)
    out = np.zeros(t.shape)
    for a, tau in model.terms:
        out = out + (-a / tau) * np.exp(-np.maximum(t, 0.0) / tau)
    return np.where(t > 0.0, out, 0.0)


# ---------------------------------------------------------------------------
# discrete filter types


@dataclass(frozen=True)
class SosSection:
    """One real second-order section ``(1 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)``.

    Pole magnitudes must stay on or inside the unit circle; a pole exactly at
    z = 1 is only admitted when the section is flagged as the designated DC
    integrator.
    """

    b1: float
    b2: float
    a1: float
    a2: float
    integrator: bool = False

    def __post_init__(self):
        for name in ("b1", "b2", "a1", "a2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(f"section coefficient {name} must be finite")
            object.__setattr__(self, name, v)
        # Jury stability conditions on z^2 + a1 z + a2 (exact, no root extraction;
        # clustered roots near z = 1 make np.roots unreliable here):
        # both roots strictly inside the unit circle iff
        #   |a2| < 1  and  1 + a1 + a2 > 0  and  1 - a1 + a2 > 0.
        at_plus1 = 1.0 + self.a1 + self.a2
        at_minus1 = 1.0 - self.a1 + self.a2
        scale = 1.0 + abs(self.a1) + abs(self.a2)
        tol = _UNIT_POLE_TOL * scale
        if self.integrator:
            if abs(at_plus1) > tol:
                raise ValidationError("integrator section must have a pole at z = 1")
            # remaining root equals a2 (product of roots, one root being 1)
            if abs(self.a2) >= 1.0 - _UNIT_POLE_TOL:
                raise ValidationError("integrator section's second pole must be stable")
        else:
            if abs(self.a2) > 1.0 - _UNIT_POLE_TOL or at_plus1 < -tol or at_minus1 < -tol:
                raise ValidationError(
                    f"unstable section: a1={self.a1}, a2={self.a2}"
                )
            if at_plus1 <= tol:
                raise ValidationError(
                    "pole at z = 1 requires the section to be flagged as integrator"
                )

    @property
    def poles(self) -> np.ndarray:
        return np.roots([1.0, self.a1, self.a2])

    @property
    def zeros(self) -> np.ndarray:
        return np.roots([1.0, self.b1, self.b2])


@dataclass(frozen=True)
class SosCascade:
    """Serial cascade of second-order sections with a single scalar gain."""

    sections: tuple[SosSection, ...]
    gain: float
    ts: float

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))
        object.__setattr__(self, "gain", float(self.gain))
        if not math.isfinite(self.gain):
            raise ValidationError("cascade gain must be finite")
        if not (self.ts > 0 and math.isfinite(self.ts)):
            raise ValidationError("cascade sample spacing must be positive")


@dataclass(frozen=True, eq=False)
class FirKernel:
    """Finite impulse response given by its tap coefficients at spacing ts."""

    coeffs: np.ndarray
    ts: float

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("FIR kernel needs a non-empty 1-d coefficient array")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("FIR coefficients must be finite")
        if not (self.ts > 0 and math.isfinite(self.ts)):
            raise ValidationError("FIR sample spacing must be positive")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)


@dataclass(frozen=True)
class FilterChain:
    """Ordered composition of filter stages applied left to right."""

    stages: tuple = ()

    def __post_init__(self):
        stages = tuple(self.stages)
        for st in stages:
            if not isinstance(st, (SosCascade, FirKernel)):
                raise ValidationError(f"unsupported chain stage {type(st).__name__}")
        ts_values = {st.ts for st in stages}
        if len(ts_values) > 1:
            raise ConfigurationError(
                f"chain stages disagree on sample spacing: {sorted(ts_values)}"
            )
        object.__setattr__(self, "stages", stages)

    @property
    def ts(self):
        return self.stages[0].ts if self.stages else None


# ---------------------------------------------------------------------------
# basic signal operations


def convolve(x: Waveform, k: FirKernel) -> Waveform:
    """Causal convolution of a waveform with an FIR kernel.

    The output keeps the input's grid and length; samples before the start of
    the waveform are taken as zero.
    """
    if not np.isclose(k.ts, x.ts, rtol=1e-12, atol=0.0):
        raise ConfigurationError(
            f"kernel spacing {k.ts} does not match waveform spacing {x.ts}"
        )
    y = np.convolve(x.samples, k.coeffs)[: len(x)]
    return Waveform(y, x.ts, x.t0)


def gaussian_smooth(x: Waveform, sigma: float) -> Waveform:
    """Zero-phase Gaussian smoothing with standard deviation ``sigma`` seconds.

    The kernel is truncated at +-4 sigma and normalized to unit sum, and the
    waveform is extended by edge replication, so constant signals pass through
    unchanged.  ``sigma = 0`` returns the input.
    """
    if sigma < 0:
        raise ConfigurationError("smoothing width must be non-negative")
    half = int(math.ceil(4.0 * sigma / x.ts))
    if sigma == 0.0 or half == 0:
        return x
    m = np.arange(-half, half + 1)
    g = np.exp(-0.5 * (m * x.ts / sigma) ** 2)
    g /= g.sum()
    padded = np.concatenate(
        [np.full(half, x.samples[0]), x.samples, np.full(half, x.samples[-1])]
    )
    return Waveform(np.convolve(padded, g, mode="valid"), x.ts, x.t0)


def discretize_roots(p_roots, ts: float) -> np.ndarray:
    """Map continuous-plane roots to the z plane via z = exp(p * ts)."""
    return np.exp(np.asarray(p_roots, dtype=complex) * ts)


# ---------------------------------------------------------------------------
# section pairing


def _conjugate_partition(roots, kind: str):
    """Split roots into real values and representatives of conjugate pairs."""
    roots = np.asarray(roots, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(roots))) if roots.size else 1.0)
    tol = 1e-9 * scale
    real = [float(r.real) for r in roots if abs(r.imag) <= tol]
    complex_left = [r for r in roots if abs(r.imag) > tol]
    pairs = []
    while complex_left:
        r = complex_left.pop(0)
        dists = [abs(other - np.conj(r)) for other in complex_left]
        if not dists or min(dists) > tol:
            raise ValidationError(
                f"complex {kind} {r} has no conjugate partner within tolerance"
            )
        complex_left.pop(int(np.argmin(dists)))
        pairs.append(complex(r.real, abs(r.imag)))
    return real, pairs


def pair_into_sos(zeros, poles, gain: float, ts: float) -> SosCascade:
    """Group z-plane zeros and poles into real second-order sections.

    The shorter root list is padded with roots at z = 0 (which act as neutral
    pads or pure FIR taps).  Sections are ordered with the poles closest to
    the unit circle first; each pole group takes the nearest remaining zeros.
    Complex roots must come in conjugate pairs and are kept together so every
    section has real coefficients.  A pole at z = 1 yields the designated
    integrator section.
    """
    zeros = list(np.asarray(zeros, dtype=complex))
    poles = list(np.asarray(poles, dtype=complex))
    while len(zeros) < len(poles):
        zeros.append(0.0 + 0.0j)
    while len(poles) < len(zeros):
        poles.append(0.0 + 0.0j)
    if not zeros:
        return SosCascade((), gain, ts)

    real_z, pair_z = _conjugate_partition(zeros, "zero")
    real_p, pair_p = _conjugate_partition(poles, "pole")

    # groups of (up to) two poles, worst (largest magnitude) first; an exact
    # z = 1 pole gets a section of its own so its coefficients stay exact
    unit_p = [r for r in real_p if abs(r - 1.0) <= _UNIT_POLE_TOL]
    real_p = [r for r in real_p if abs(r - 1.0) > _UNIT_POLE_TOL]
    real_p.sort(key=lambda r: (-abs(r), -r))
    pair_p.sort(key=lambda c: (-abs(c), -c.real))
    groups = [[1.0] for _ in unit_p]
    groups += [[c, np.conj(c)] for c in pair_p]
    # remaining real poles pair up in magnitude order; odd one out is first order
    for i in range(0, len(real_p) - 1, 2):
        groups.append([real_p[i], real_p[i + 1]])
    if len(real_p) % 2:
        groups.append([real_p[-1]])
    groups.sort(key=lambda g: (-max(abs(p) for p in g), -max(p.real for p in g)))

    sections = []
    for group in groups:
        p1 = group[0]
        want = len(group)
        zsel = []
        # nearest complex pair, treated atomically
        best_pair = None
        if pair_z and want == 2:
            dists = [abs(c - p1) for c in pair_z]
            best_pair = (min(dists), int(np.argmin(dists)))
        best_real = None
        if real_z:
            dists = [abs(r - p1) for r in real_z]
            best_real = (min(dists), int(np.argmin(dists)))
        if best_pair is not None and (best_real is None or best_pair[0] <= best_real[0]):
            c = pair_z.pop(best_pair[1])
            zsel = [c, np.conj(c)]
        elif best_real is not None:
            zsel = [real_z.pop(best_real[1])]
            if want == 2:
                if real_z:
                    ref = group[1] if len(group) > 1 else p1
                    dists = [abs(r - ref) for r in real_z]
                    zsel.append(real_z.pop(int(np.argmin(dists))))
                elif pair_z:
                    raise ValidationError(
                        "cannot split a conjugate zero pair across sections"
                    )
        if len(zsel) < want and (real_z or pair_z):
            raise ValidationError("zero/pole grouping failed to balance")

        if want == 2:
            a1 = -float((group[0] + group[1]).real)
            a2 = float((group[0] * group[1]).real)
        else:
            a1, a2 = -float(np.real(group[0])), 0.0
        if len(zsel) == 2:
            b1 = -float((zsel[0] + zsel[1]).real)
            b2 = float((zsel[0] * zsel[1]).real)
        elif len(zsel) == 1:
            b1, b2 = -float(np.real(zsel[0])), 0.0
        else:
            b1, b2 = 0.0, 0.0
        is_integrator = any(abs(p - 1.0) <= _UNIT_POLE_TOL for p in group)
        sections.append(SosSection(b1, b2, a1, a2, integrator=is_integrator))

    if real_z or pair_z:
        raise ValidationError("zeros left over after pairing")
    return SosCascade(tuple(sections), gain, ts)


# ---------------------------------------------------------------------------
# filter application


def apply_sos(cascade: SosCascade, x: Waveform) -> Waveform:
    """Run a waveform through the cascade (zero initial state).

    Each section is the difference equation
    ``y[n] = x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]``;
    scipy's lfilter evaluates it in transposed direct form II.
    """
    if not np.isclose(cascade.ts, x.ts, rtol=1e-12, atol=0.0):
        raise ConfigurationError("cascade and waveform sample spacings differ")
    y = x.samples
    for s in cascade.sections:
        y = scipy.signal.lfilter([1.0, s.b1, s.b2], [1.0, s.a1, s.a2], y)
    return Waveform(cascade.gain * y, x.ts, x.t0)


def apply_fir(kernel: FirKernel, x: Waveform) -> Waveform:
    return convolve(x, kernel)


def apply_chain(chain: FilterChain, x: Waveform) -> Waveform:
    """Apply every stage of the chain in order."""
    if chain.ts is not None and not np.isclose(chain.ts, x.ts, rtol=1e-12, atol=0.0):
        raise ConfigurationError("chain and waveform sample spacings differ")
    y = x
    for st in chain.stages:
        y = apply_sos(st, y) if isinstance(st, SosCascade) else apply_fir(st, y)
    return y


def impulse_response(filt, n: int) -> np.ndarray:
    """First ``n`` samples of the impulse response of a cascade/kernel/chain."""
    ts = filt.ts if not isinstance(filt, FilterChain) else (filt.ts or 1.0)
    x = np.zeros(n)
    x[0] = 1.0
    w = Waveform(x, ts)
    if isinstance(filt, FilterChain):
        return apply_chain(filt, w).samples
    if isinstance(filt, SosCascade):
        return apply_sos(filt, w).samples
    return apply_fir(filt, w).samples


def step_response(filt, n: int) -> np.ndarray:
    ts = filt.ts if not isinstance(filt, FilterChain) else (filt.ts or 1.0)
    w = Waveform(np.ones(n), ts)
    if isinstance(filt, FilterChain):
        return apply_chain(filt, w).samples
    if isinstance(filt, SosCascade):
        return apply_sos(filt, w).samples
    return apply_fir(filt, w).samples


# ---------------------------------------------------------------------------
# transfer-function algebra on exponential step models


def _polish_roots(roots: np.ndarray, coeffs_low: np.ndarray) -> np.ndarray:
    """One Newton step per root against the original polynomial."""
    der = npoly.polyder(coeffs_low)
    val = npoly.polyval(roots, coeffs_low)
    slope = npoly.polyval(roots, der)
    safe = np.abs(slope) > 0
    polished = roots.copy()
    polished[safe] = roots[safe] - val[safe] / slope[safe]
    return polished


def _roots_low(coeffs_low: np.ndarray) -> np.ndarray:
    """Roots of a polynomial given in ascending-power coefficients.

    Uses the companion-matrix eigenvalue method (np.roots) followed by one
    Newton polish; near-real roots are snapped onto the real axis.
    """
    coeffs_low = np.asarray(coeffs_low, dtype=float)
    scale = np.max(np.abs(coeffs_low))
    if scale == 0:
        raise NumericError("zero polynomial has no roots")
    trimmed = np.trim_zeros(coeffs_low / scale, "b")
    if trimmed.size <= 1:
        return np.array([], dtype=complex)
    r = np.roots(trimmed[::-1])
    r = _polish_roots(r, trimmed)
    resid = np.abs(npoly.polyval(r, trimmed))
    bound = 1e-6 * np.maximum(1.0, np.abs(r)) ** (trimmed.size - 1)
    if np.any(resid > bound):
        raise NumericError("polynomial root polishing failed to converge")
    imag_small = np.abs(r.imag) <= _IMAG_ROUND_RTOL * np.maximum(np.abs(r), 1e-300)
    r = np.where(imag_small, r.real + 0.0j, r)
    return r


def transfer_function_roots(model: ExponentialStepModel):
    """Continuous-plane zeros and poles of the model's transfer function.

    With step response ``alpha0 + sum alpha_i exp(-t/tau_i)`` the transfer
    function is ``H(p) = D(p) / prod_i (tau_i p + 1)``, so the poles sit at
    ``p = -1/tau_i`` and the zeros are the roots of

        D(p) = alpha0 prod_i (tau_i p + 1)
             + sum_j alpha_j tau_j p prod_{i != j} (tau_i p + 1).

    When alpha0 = 0, D has an exact root at p = 0 (the model blocks DC); that
    root is returned explicitly so downstream code can pin it to z = 1.

    Returns (zeros, poles, hf_gain) where hf_gain = alpha0 + sum(alpha) is
    H(p -> inf).
    """
    alphas, taus = model.alphas, model.taus
    hf_gain = model.instantaneous
    if abs(hf_gain) < 1e-12 * max(1.0, np.max(np.abs(alphas), initial=0.0)):
        raise ConfigurationError(
            "model has no instantaneous response (alpha0 + sum alpha ~ 0); "
            "such behavior belongs in a short-time FIR kernel"
        )
    poles = -1.0 / taus
    factors = [np.array([1.0, tau]) for tau in taus]

    def prod_except(skip):
        acc = np.array([1.0])
        for i, f in enumerate(factors):
            if i != skip:
                acc = npoly.polymul(acc, f)
        return acc

    d = model.alpha0 * prod_except(-1)
    for j, (a, tau) in enumerate(model.terms):
        term = npoly.polymul(np.array([0.0, a * tau]), prod_except(j))
        d = npoly.polyadd(d, term)
    d = np.atleast_1d(d)
    if model.alpha0 == 0.0:
        # constant coefficient is exactly alpha0; factor the p = 0 root out
        assert d[0] == 0.0
        zeros = np.concatenate([[0.0 + 0.0j], _roots_low(d[1:])])
    else:
        zeros = _roots_low(d)
    return zeros, poles.astype(complex), hf_gain


def realize_matched_z(model: ExponentialStepModel, ts: float) -> SosCascade:
    """Matched-z discrete realization of the model's transfer function.

    Zeros and poles are mapped with z = exp(p ts) and the gain is set to the
    instantaneous response, so the first output sample of a unit step equals
    alpha0 + sum(alpha).
    """
    zeros, poles, hf_gain = transfer_function_roots(model)
    return pair_into_sos(
        discretize_roots(zeros, ts), discretize_roots(poles, ts), hf_gain, ts
    )


def realize_step_invariant(model: ExponentialStepModel, ts: float) -> SosCascade:
    """Zero-order-hold discrete realization: exact step-response samples.

    The discrete transfer function is
    ``alpha0 + sum_i alpha_i (1 - z^-1) / (1 - rho_i z^-1)`` with
    ``rho_i = exp(-ts / tau_i)``; driving it with a unit step reproduces
    ``step_response_eval`` at every sample time exactly (up to round-off).

    The numerator's roots in w = z^-1 all cluster near w = 1 when the time
    constants are long compared to ts, which is hopelessly ill-conditioned in
    the plain monomial basis.  The polynomial is therefore assembled in the
    shifted variable u = w - 1, where the factors read
    ``(1 - rho_i w) = (delta_i - rho_i u)`` with ``delta_i = 1 - rho_i``
    computed via expm1; the roots then separate on a log scale and come out
    with full relative accuracy.
    """
    alphas, taus = model.alphas, model.taus
    rho = np.exp(-ts / taus)
    delta = -np.expm1(-ts / taus)  # 1 - rho, no cancellation
    gain = model.instantaneous
    if abs(gain) < 1e-12 * max(1.0, np.max(np.abs(alphas), initial=0.0)):
        raise ConfigurationError(
            "model has no instantaneous response; cannot realize with unit-leading sections"
        )
    factors_u = [np.array([d, -r]) for d, r in zip(delta, rho)]

    def prod_except(skip):
        acc = np.array([1.0])
        for i, f in enumerate(factors_u):
            if i != skip:
                acc = npoly.polymul(acc, f)
        return acc

    # N(1 + u) = alpha0 prod(delta_i - rho_i u) - u sum_j alpha_j prod_{i!=j}(...)
    num_u = model.alpha0 * prod_except(-1)
    for j, a in enumerate(alphas):
        num_u = npoly.polyadd(num_u, npoly.polymul(np.array([0.0, -a]), prod_except(j)))
    num_u = np.atleast_1d(num_u)
    if model.alpha0 == 0.0:
        # constant term is alpha0 * prod(delta) = 0 exactly: root at u = 0,
        # i.e. a discrete blocker zero exactly at z = 1
        assert num_u[0] == 0.0
        roots_u = np.concatenate([[0.0 + 0.0j], _roots_low(num_u[1:])])
    else:
        roots_u = _roots_low(num_u)
    zeros = 1.0 / (1.0 + roots_u)  # w = 1 + u, z = 1/w
    return pair_into_sos(zeros, rho.astype(complex), gain, ts)


def one_pole_lowpass_kernel(cutoff_hz: float, ts: float) -> FirKernel:
    """Zero-order-hold FIR equivalent of a one-pole low-pass at ``cutoff_hz``.

    Tap m is s((m+1) ts) - s(m ts) with s(t) = 1 - exp(-t/tau), the step
    response increment over the m-th sample interval (the standard discrete
    equivalent (1-p)/(1 - p z^-1), so there is no artificial dead sample);
    the kernel is truncated once the step response has settled to ~1e-12 and
    renormalized to exactly unit sum so cascaded plateaus stay calibrated.
    """
    if cutoff_hz <= 0:
        raise ConfigurationError("low-pass cutoff must be positive")
    tau = 1.0 / (2.0 * math.pi * cutoff_hz)
    m_max = max(2, int(math.ceil(28.0 * tau / ts)))
    s = 1.0 - np.exp(-(np.arange(m_max + 1) * ts) / tau)
    g = np.diff(s)
    g /= g.sum()
    return FirKernel(g, ts)
