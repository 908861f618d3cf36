"""Tests for the discrete-time LTI core."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from fluxcal.errors import ConfigurationError, ValidationError
from fluxcal.lti import (
    ExponentialStepModel,
    FilterChain,
    FirKernel,
    SosCascade,
    SosSection,
    Waveform,
    apply_chain,
    apply_sos,
    convolve,
    discretize_roots,
    gaussian_smooth,
    impulse_response,
    impulse_response_eval,
    one_pole_lowpass_kernel,
    pair_into_sos,
    realize_matched_z,
    realize_step_invariant,
    step_response,
    step_response_eval,
    transfer_function_roots,
)

TS = 1.0 / 2.4e9


def unit_step(n, ts=TS, t0=0.0):
    return Waveform(np.ones(n), ts, t0)


# ---------------------------------------------------------------------------
# Waveform


def test_waveform_validation():
    with pytest.raises(ValidationError):
        Waveform(np.array([]), TS)
    with pytest.raises(ValidationError):
        Waveform([1.0, np.nan], TS)
    with pytest.raises(ValidationError):
        Waveform([1.0], -1e-9)


def test_waveform_times_and_immutability():
    w = Waveform([1.0, 2.0, 3.0], ts=2.0, t0=-2.0)
    assert np.allclose(w.times, [-2.0, 0.0, 2.0])
    with pytest.raises(ValueError):
        w.samples[0] = 5.0


def test_waveform_index_of():
    w = Waveform(np.zeros(10), ts=1e-9, t0=-2e-9)
    assert w.index_of(-2e-9) == 0
    assert w.index_of(3e-9) == 5
    with pytest.raises(ConfigurationError):
        w.index_of(3.4e-9)
    with pytest.raises(ConfigurationError):
        w.index_of(9e-9)


# ---------------------------------------------------------------------------
# convolve / gaussian_smooth


def test_convolve_step_example():
    k = FirKernel([1.0, 0.0, 0.5], TS)
    y = convolve(unit_step(6), k)
    assert np.allclose(y.samples, [1.0, 1.0, 1.5, 1.5, 1.5, 1.5])


def test_convolve_identity_and_delay():
    x = Waveform(np.arange(5, dtype=float), TS)
    assert np.allclose(convolve(x, FirKernel([1.0], TS)).samples, x.samples)
    d = convolve(x, FirKernel([0.0, 1.0], TS))
    assert np.allclose(d.samples, [0.0, 0.0, 1.0, 2.0, 3.0])


def test_convolve_ts_mismatch():
    with pytest.raises(ConfigurationError):
        convolve(unit_step(4), FirKernel([1.0], 2 * TS))


@given(
    st.lists(st.floats(-5, 5), min_size=3, max_size=12),
    st.lists(st.floats(-5, 5), min_size=3, max_size=12),
    st.lists(st.floats(-2, 2), min_size=1, max_size=5),
    st.floats(-3, 3),
)
def test_convolve_linearity(xa, xb, k, c):
    ka = FirKernel(np.array(k) + 0.25, TS)  # keep away from all-zero
    n = min(len(xa), len(xb))
    wa = Waveform(np.array(xa[:n]), TS)
    wb = Waveform(np.array(xb[:n]), TS)
    combo = convolve(Waveform(wa.samples + c * wb.samples, TS), ka).samples
    parts = convolve(wa, ka).samples + c * convolve(wb, ka).samples
    assert np.allclose(combo, parts, atol=1e-9)


def test_gaussian_smooth_constant_exact():
    w = Waveform(np.full(64, 0.7), TS)
    out = gaussian_smooth(w, 0.5e-9)
    assert np.array_equal(out.samples, w.samples)


def test_gaussian_smooth_zero_sigma_identity():
    w = Waveform(np.random.default_rng(0).normal(size=32), TS)
    assert np.array_equal(gaussian_smooth(w, 0.0).samples, w.samples)


def test_gaussian_smooth_step_midpoint_and_erf_oracle():
    # step rises between samples j-1 and j; the continuous-time counterpart
    # has its edge at the midpoint, where the Gaussian-filtered value is 1/2
    n, j, sigma = 400, 200, 0.5e-9
    x = np.zeros(n)
    x[j:] = 1.0
    y = gaussian_smooth(Waveform(x, TS), sigma).samples
    assert abs(0.5 * (y[j - 1] + y[j]) - 0.5) < 1e-3
    t = TS * (np.arange(n) - (j - 0.5))
    oracle = 0.5 * (1.0 + erf(t / (sigma * math.sqrt(2.0))))
    # sampled-kernel CDF deviates from the continuous profile by <1% at
    # sigma = 1.2 samples; the midpoint check above pins the centering
    assert np.max(np.abs(y - oracle)) < 1e-2


# ---------------------------------------------------------------------------
# ExponentialStepModel / step_response_eval


def test_model_validation():
    with pytest.raises(ValidationError):
        ExponentialStepModel(0.0, ((1.0, 1e-6), (0.5, 1e-6)))
    with pytest.raises(ValidationError):
        ExponentialStepModel(0.0, ((1.0, -1e-6),))
    with pytest.raises(ValidationError):
        ExponentialStepModel(math.inf, ((1.0, 1e-6),))


def test_step_response_eval_limits():
    m = ExponentialStepModel(0.2, ((0.8, 1e-6),))
    assert step_response_eval(m, 0.0) == pytest.approx(1.0)
    assert step_response_eval(m, 1.0) == pytest.approx(0.2)
    assert step_response_eval(m, -1e-9) == 0.0
    assert step_response_eval(m, 1e-6) == pytest.approx(0.2 + 0.8 / math.e)


def test_step_response_derivative_matches_impulse_response():
    # central difference of the step response against the analytic impulse
    # response, with the rigorous Taylor bound h^2/6 * max|s'''|
    m = ExponentialStepModel(0.1, ((0.6, 2e-6), (0.3, 3e-7)))
    h = 1e-9
    t = np.linspace(5e-8, 5e-6, 400)
    num = (step_response_eval(m, t + h) - step_response_eval(m, t - h)) / (2 * h)
    ana = impulse_response_eval(m, t)
    s3max = sum(abs(a) / tau**3 for a, tau in m.terms)
    assert np.max(np.abs(num - ana)) <= h**2 / 6 * s3max + 1e-9 * np.max(np.abs(ana))


# ---------------------------------------------------------------------------
# discretization and pairing


def test_discretize_roots_slow_pole():
    z = discretize_roots([-1.0 / 19.2e-6], TS)[0]
    assert z == pytest.approx(math.exp(-(1.0 / 2.4e9) / 19.2e-6), rel=1e-15)
    assert z == pytest.approx(0.9999783, abs=1e-7)


def test_pair_single_pole_zero():
    c = pair_into_sos([0.5], [0.9], 2.0, TS)
    assert len(c.sections) == 1 and c.gain == 2.0
    s = c.sections[0]
    assert (s.b1, s.b2, s.a1, s.a2) == (-0.5, 0.0, -0.9, 0.0)


def test_pair_conjugate_pair():
    c = pair_into_sos([0.5 + 0.1j, 0.5 - 0.1j], [0.9 + 0.2j, 0.9 - 0.2j], 1.0, TS)
    s = c.sections[0]
    assert s.b1 == pytest.approx(-1.0)
    assert s.b2 == pytest.approx(0.26)
    assert s.a1 == pytest.approx(-1.8)
    assert s.a2 == pytest.approx(0.85)


def test_pair_padding_with_origin_roots():
    # one zero, three poles: zero list padded with roots at z = 0
    c = pair_into_sos([0.5], [0.9, 0.8, 0.7], 1.0, TS)
    n_zeros = sum(2 if s.b2 != 0 else (1 if s.b1 != 0 else 0) for s in c.sections)
    all_poles = np.concatenate([s.poles for s in c.sections])
    assert sorted(np.round(np.abs(all_poles), 12).tolist(), reverse=True)[:3] == [0.9, 0.8, 0.7]


def test_pair_rejects_unpaired_complex():
    with pytest.raises(ValidationError):
        pair_into_sos([0.5 + 0.1j, 0.5 + 0.2j], [0.9, 0.8], 1.0, TS)


def test_pair_ordering_and_assignment_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(25):
        poles = rng.uniform(0.05, 0.99, size=4)
        zeros = rng.uniform(0.05, 1.5, size=4)
        c = pair_into_sos(zeros, poles, 1.0, TS)
        mags = [max(abs(p) for p in s.poles) for s in c.sections]
        assert mags == sorted(mags, reverse=True)
        # reference rule: sort poles descending, pair adjacent, then each
        # group takes the zero nearest its leading pole, then its partner
        ps = sorted(poles, reverse=True)
        zleft = list(zeros)
        want_b = []
        for p1, p2 in [(ps[0], ps[1]), (ps[2], ps[3])]:
            z1 = zleft.pop(int(np.argmin([abs(z - p1) for z in zleft])))
            z2 = zleft.pop(int(np.argmin([abs(z - p2) for z in zleft])))
            want_b.append((-(z1 + z2), z1 * z2))
        got_b = [(s.b1, s.b2) for s in c.sections]
        assert np.allclose(np.array(got_b), np.array(want_b), atol=1e-12)


def test_section_stability_validation():
    with pytest.raises(ValidationError):
        SosSection(0.0, 0.0, -2.2, 1.2)  # pole outside unit circle
    with pytest.raises(ValidationError):
        SosSection(0.0, 0.0, -1.0, 0.0)  # pole at z=1 without flag
    s = SosSection(0.0, 0.0, -1.0, 0.0, integrator=True)
    assert s.integrator
    with pytest.raises(ValidationError):
        SosSection(0.0, 0.0, -0.5, 0.0, integrator=True)  # flag without unit pole


# ---------------------------------------------------------------------------
# filtering


def test_apply_sos_first_order_geometric():
    c = SosCascade((SosSection(0.0, 0.0, -0.5, 0.0),), 1.0, TS)
    h = impulse_response(c, 10)
    assert np.allclose(h, 0.5 ** np.arange(10), rtol=1e-13)


def test_apply_sos_matches_truncated_convolution():
    c = SosCascade((SosSection(-0.3, 0.1, -0.9, 0.3),), 1.2, TS)
    n = 10_000
    h = impulse_response(c, n)
    rng = np.random.default_rng(3)
    x = Waveform(rng.normal(size=n), TS)
    direct = np.convolve(x.samples, h)[:n]
    assert np.max(np.abs(apply_sos(c, x).samples - direct)) < 1e-12


def test_cascade_section_order_commutes():
    s1 = SosSection(-0.2, 0.0, -0.8, 0.12)
    s2 = SosSection(0.4, 0.03, -1.2, 0.4)
    x = Waveform(np.random.default_rng(1).normal(size=500), TS)
    y12 = apply_sos(SosCascade((s1, s2), 1.5, TS), x).samples
    y21 = apply_sos(SosCascade((s2, s1), 1.5, TS), x).samples
    assert np.allclose(y12, y21, atol=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-0.9999, 0.9999), min_size=2, max_size=4), st.integers(0, 2**31))
def test_stable_cascade_tail_decays(pole_list, seed):
    # pole magnitudes capped at 0.9999 so the 1e6-sample tail bound holds
    # mathematically (|p|^1e6 < 1e-12 requires |p| < 1 - 27.6e-6)
    poles = np.array(pole_list)
    c = pair_into_sos(np.zeros_like(poles), poles, 1.0, TS)
    h = impulse_response(c, 1_000_000)
    peak = np.max(np.abs(h))
    assert peak > 0
    assert np.max(np.abs(h[-100:])) < 1e-12 * peak


def test_filter_chain_validation_and_apply():
    k = FirKernel([0.5, 0.5], TS)
    c = SosCascade((SosSection(0.0, 0.0, -0.5, 0.0),), 1.0, TS)
    with pytest.raises(ConfigurationError):
        FilterChain((k, FirKernel([1.0], 2 * TS)))
    chain = FilterChain((k, c))
    x = Waveform(np.random.default_rng(2).normal(size=64), TS)
    manual = apply_sos(c, convolve(x, k)).samples
    assert np.allclose(apply_chain(chain, x).samples, manual)
    assert np.array_equal(apply_chain(FilterChain(()), x).samples, x.samples)


# ---------------------------------------------------------------------------
# transfer-function algebra and realizations


def _direct_transfer(model, p):
    val = np.full_like(p, model.alpha0, dtype=complex)
    for a, tau in model.terms:
        val += a * tau * p / (tau * p + 1.0)
    return val


@given(
    st.floats(0.0, 2.0),
    st.lists(
        st.tuples(st.floats(0.05, 1.5), st.sampled_from([1e-7, 7e-7, 4e-6, 2e-5])),
        min_size=1,
        max_size=4,
        unique_by=lambda t: t[1],
    ),
)
def test_transfer_roots_reproduce_rational_function(alpha0, terms):
    model = ExponentialStepModel(alpha0, tuple(terms))
    zeros, poles, hf = transfer_function_roots(model)
    p = np.array([3e4 + 1e4j, -9e4 + 7e5j, 2.2e6 + 0.0j, 1e7 - 3e6j])
    num = np.prod(p[:, None] - zeros[None, :], axis=1)
    den = np.prod(p[:, None] - poles[None, :], axis=1)
    assert np.allclose(hf * num / den, _direct_transfer(model, p), rtol=1e-7)


def test_transfer_roots_dc_blocking_zero():
    m = ExponentialStepModel(0.0, ((1.0, 19.2e-6),))
    zeros, poles, hf = transfer_function_roots(m)
    assert zeros.tolist() == [0.0 + 0.0j]
    assert poles[0] == pytest.approx(-1.0 / 19.2e-6)
    assert hf == 1.0


def test_transfer_roots_rejects_no_feedthrough():
    with pytest.raises(ConfigurationError):
        transfer_function_roots(ExponentialStepModel(1.0, ((-1.0, 1e-6),)))


def test_step_invariant_realization_exact_samples():
    m = ExponentialStepModel(
        0.0, ((0.9, 19.2e-6), (0.05, 3.5e-6), (0.03, 6e-7), (0.02, 1.2e-7))
    )
    line = realize_step_invariant(m, TS)
    n = 200_000
    resp = step_response(line, n)
    exact = step_response_eval(m, TS * np.arange(n))
    assert np.max(np.abs(resp - exact)) < 1e-6


def test_step_invariant_single_term_e_inverse_at_tau():
    m = ExponentialStepModel(0.0, ((1.0, 19.2e-6),))
    line = realize_step_invariant(m, TS)
    k = round(19.2e-6 / TS)
    resp = step_response(line, k + 1)
    assert resp[k] == pytest.approx(math.exp(-k * TS / 19.2e-6), abs=1e-9)
    assert resp[k] == pytest.approx(1.0 / math.e, abs=1e-6)


def test_matched_z_instantaneous_gain():
    m = ExponentialStepModel(0.25, ((0.75, 1e-6),))
    c = realize_matched_z(m, TS)
    assert step_response(c, 4)[0] == pytest.approx(1.0, rel=1e-12)


def test_one_pole_lowpass_kernel_properties():
    k = one_pole_lowpass_kernel(780e6, TS)
    p = math.exp(-2 * math.pi * 780e6 * TS)
    assert k.coeffs[0] == pytest.approx(1.0 - p, rel=1e-9)
    assert int(np.argmax(k.coeffs)) == 0
    assert k.coeffs.sum() == pytest.approx(1.0, abs=1e-15)
    # cumulative sums lie on the continuous step response at (m+1) ts
    stp = np.cumsum(k.coeffs)
    t = TS * (1 + np.arange(len(k.coeffs)))
    tau = 1.0 / (2 * math.pi * 780e6)
    assert np.allclose(stp, 1.0 - np.exp(-t / tau), atol=1e-10)
    # rise time needs a cutoff the 0.42 ns grid actually resolves
    slow = one_pole_lowpass_kernel(60e6, TS)
    stp = np.concatenate([[0.0], np.cumsum(slow.coeffs)])
    t = TS * np.arange(len(slow.coeffs) + 1)
    t10 = np.interp(0.1, stp, t)
    t90 = np.interp(0.9, stp, t)
    tau_slow = 1.0 / (2 * math.pi * 60e6)
    assert t90 - t10 == pytest.approx(math.log(9.0) * tau_slow, abs=0.1e-9)
