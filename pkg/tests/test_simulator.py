import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxcal import defaults
from fluxcal.errors import ConfigurationError, ValidationError
from fluxcal.lti import (
    ExponentialStepModel,
    FilterChain,
    FirKernel,
    Waveform,
    apply_chain,
)
from fluxcal.simulator import (
    CryoscopeSchedule,
    DistortionScenario,
    FrequencyTrace,
    NoiseConfig,
    SpectroscopyGrid,
    build_line,
    cascaded_lowpass_kernel,
    default_cryo_noise,
    default_cryoscope_schedule,
    default_time_grid,
    oracle_frequency_trace,
    paper_like_scenario,
    rectangular_pulse,
    run_cryoscope,
    run_spectroscopy,
)
from fluxcal.transmon import FrequencyModel, nu

TS = defaults.TS


def identity_chain():
    return FilterChain(())


def device_model(v_dc=0.0, spec_shift=0.0):
    return FrequencyModel(defaults.default_device(), v_dc=v_dc,
                          spec_shift=spec_shift)


class TestScenarioAndLine:
    def test_empty_scenario_builds_identity(self):
        chain = build_line(DistortionScenario(), TS)
        assert chain.stages == ()
        w = Waveform(np.array([0.0, 1.0, 0.5]), TS)
        assert np.array_equal(apply_chain(chain, w).samples, w.samples)

    def test_long_time_step_response_is_sampled_model(self):
        model = ExponentialStepModel(0.1, ((0.7, 1e-6), (0.2, 1e-7)))
        chain = build_line(DistortionScenario(long_time=model), TS)
        n = 4000
        out = apply_chain(chain, Waveform(np.ones(n), TS))
        t = np.arange(n) * TS
        expect = (0.1 + 0.7 * np.exp(-t / 1e-6) + 0.2 * np.exp(-t / 1e-7))
        np.testing.assert_allclose(out.samples, expect, atol=2e-6)

    def test_single_term_reaches_e_inverse_at_tau(self):
        tau = 2e-7
        chain = build_line(
            DistortionScenario(long_time=ExponentialStepModel(0.0, ((1.0, tau),))),
            TS,
        )
        k = round(tau / TS)
        out = apply_chain(chain, Waveform(np.ones(k + 1), TS))
        assert out.samples[k] == pytest.approx(math.exp(-k * TS / tau), abs=1e-9)

    def test_short_kernel_renormalized_to_unit_dc(self):
        kern = FirKernel(np.array([1.0, 0.6, 0.4]), TS)  # sum = 2
        chain = build_line(DistortionScenario(short_time=kern), TS)
        out = apply_chain(chain, Waveform(np.ones(16), TS))
        assert out.samples[-1] == pytest.approx(1.0, abs=1e-12)

    def test_echo_tap_placement_and_normalization(self):
        chain = build_line(DistortionScenario(echoes=((0.1, 5 * TS),)), TS)
        (kern,) = chain.stages
        expect = np.zeros(6)
        expect[0], expect[5] = 1.0, 0.1
        np.testing.assert_allclose(kern.coeffs, expect / 1.1, rtol=1e-15)

    def test_rejects_blocking_long_time_model(self):
        blocked = ExponentialStepModel(1.0, ((-1.0, 1e-7),))
        with pytest.raises(ConfigurationError):
            build_line(DistortionScenario(long_time=blocked), TS)

    def test_rejects_zero_dc_kernel_and_ts_mismatch(self):
        with pytest.raises(ConfigurationError):
            build_line(
                DistortionScenario(short_time=FirKernel(np.array([1.0, -1.0]), TS)),
                TS,
            )
        with pytest.raises(ConfigurationError):
            build_line(
                DistortionScenario(short_time=FirKernel(np.array([1.0]), 2 * TS)),
                TS,
            )

    def test_rejects_negative_echo_delay(self):
        with pytest.raises(ValidationError):
            DistortionScenario(echoes=((0.1, -1e-9),))

    def test_fast_term_settles_near_fifty_nanoseconds(self):
        # a line with a 20 ns pole reaches the slow envelope at about
        # tau * ln(amp / 0.005) ~ 46 ns
        model = ExponentialStepModel(
            0.0, ((0.90, 19.2e-6), (0.05, 3.5e-6), (0.05, 20e-9))
        )
        chain = build_line(DistortionScenario(long_time=model), TS)
        n = 400
        out = apply_chain(chain, Waveform(np.ones(n), TS)).samples
        t = np.arange(n) * TS
        slow = 0.90 * np.exp(-t / 19.2e-6) + 0.05 * np.exp(-t / 3.5e-6)
        k_cross = np.argmax(np.abs(out - slow) < 0.005)
        assert 40e-9 < k_cross * TS < 60e-9

    def test_paper_like_scenario_has_unit_plateau(self):
        chain = build_line(paper_like_scenario(TS), TS)
        out = apply_chain(chain, Waveform(np.ones(200), TS))
        # after the short-time transients the response must ride the
        # long-time envelope with unit scale
        model = defaults.paper_like_model()
        k = 60
        envelope = model.alpha0 + np.sum(
            model.alphas * np.exp(-k * TS / model.taus)
        )
        assert out.samples[k] / envelope == pytest.approx(1.0, abs=5e-4)

    def test_lowpass_cascade_kernel_is_normalized(self):
        kern = cascaded_lowpass_kernel((300e6, 780e6), TS)
        assert np.sum(kern.coeffs) == pytest.approx(1.0, abs=1e-9)
        assert int(np.argmax(kern.coeffs)) == 0


class TestNoiseConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError):
            NoiseConfig(n_r=-1)
        with pytest.raises(ValidationError):
            NoiseConfig(n_theta=3)
        with pytest.raises(ValidationError):
            NoiseConfig(sigma_floor_hz=-1.0)
        with pytest.raises(ValidationError):
            NoiseConfig(seed=-1)

    def test_zero_repetitions_means_noiseless(self):
        cfg = NoiseConfig(n_r=0)
        assert cfg.n_r == 0


class TestSchedule:
    def test_rejects_overlap_and_bad_step(self):
        with pytest.raises(ValidationError):
            CryoscopeSchedule((((0.0, 2e-9), 1), ((1e-9, 3e-9), 1)))
        with pytest.raises(ConfigurationError):
            CryoscopeSchedule((((0.0, 2e-9), 0),))
        with pytest.raises(ValidationError):
            CryoscopeSchedule((((2e-9, 2e-9), 1),))

    def test_pair_spacing_matches_multiplier(self):
        sched = CryoscopeSchedule((((0.0, 10e-9), 2), ((20e-9, 40e-9), 8)))
        for k1, k2 in sched.sample_pairs(TS):
            assert k2 - k1 in (2, 8)

    def test_default_schedule_covers_both_edges(self):
        sched = default_cryoscope_schedule()
        pairs = sched.sample_pairs(TS)
        mids = np.array([(a + b) / 2 * TS for a, b in pairs])
        assert np.all(np.diff(mids) > 0)
        # pairs reach both pulse edges but never leave the pulse
        n_pulse = round(defaults.CRYO_PULSE_DURATION_S / TS)
        assert pairs[0] == (0, 1)
        assert pairs[-1] == (n_pulse - 1, n_pulse)
        assert all(0 <= k1 < k2 <= n_pulse for k1, k2 in pairs)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.floats(1e-9, 50e-9), st.floats(1e-9, 40e-9))
    def test_pairs_line_up_with_requested_centers(self, mult, start, span):
        sched = CryoscopeSchedule((((start, start + span), mult),))
        for k1, k2 in sched.sample_pairs(TS):
            assert k2 - k1 == mult
            mid = (k1 + k2) / 2 * TS
            assert start - (mult + 1) * TS < mid < start + span + (mult + 1) * TS


class TestTraceAndGridTypes:
    def test_trace_validation(self):
        t = np.array([1e-9, 2e-9])
        with pytest.raises(ValidationError):
            FrequencyTrace(t, np.zeros(3), np.zeros(2), np.zeros(2))
        with pytest.raises(ValidationError):
            FrequencyTrace(t[::-1], np.zeros(2), np.zeros(2), np.zeros(2))
        with pytest.raises(ValidationError):
            FrequencyTrace(t, np.zeros(2), -np.ones(2), np.zeros(2))
        tr = FrequencyTrace(t, np.zeros(2), np.zeros(2), np.zeros(2))
        assert len(tr) == 2
        with pytest.raises(ValueError):
            tr.f01[0] = 1.0

    def test_grid_validation(self):
        with pytest.raises(ValidationError):
            SpectroscopyGrid(np.zeros(3), np.zeros((2, 4)), np.zeros((2, 4)))


class TestOracle:
    def test_identity_line_maps_flux_through_nu(self):
        m = device_model()
        w = Waveform(np.array([0.0, -0.1, -0.26, -0.26]), TS)
        tr = oracle_frequency_trace(identity_chain(), w, m)
        np.testing.assert_allclose(tr.f01, nu(m, w.samples), rtol=0, atol=1e-6)
        assert np.all(tr.sigma_f == 0.0)

    def test_resting_line_sits_at_idle(self):
        m = device_model()
        w = Waveform(np.zeros(32), TS)
        tr = oracle_frequency_trace(build_line(paper_like_scenario(TS), TS), w, m)
        np.testing.assert_allclose(tr.f01, nu(m, 0.0), rtol=0, atol=1e-6)


class TestCryoscope:
    def test_flat_pulse_recovered_exactly_without_noise(self):
        # identity line, no smoothing: the phase-difference estimator is
        # an exact window average, so bulk points hit nu(amp) to rounding
        m = device_model()
        amp = defaults.PULSE_AMP_PHI0
        pulse = rectangular_pulse(amp, 100e-9, TS)
        sched = default_cryoscope_schedule()
        tr = run_cryoscope(identity_chain(), None, m, pulse, sched,
                           NoiseConfig(n_r=0), sigma_fp=0.0)
        n_pulse = round(100e-9 / TS)
        bulk = np.array(
            [k1 >= 1 and k2 <= n_pulse - 1 for k1, k2 in sched.sample_pairs(TS)]
        )
        target = nu(m, amp)
        assert bulk.sum() > 20
        np.testing.assert_allclose(tr.f01[bulk], target, rtol=0, atol=5.0)
        assert np.all(tr.sigma_f == 0.0)

    def test_distorted_line_tracked_within_window_averaging(self):
        m = device_model()
        line = build_line(paper_like_scenario(TS), TS)
        pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, 100e-9, TS)
        tr = run_cryoscope(line, None, m, pulse, default_cryoscope_schedule(),
                           NoiseConfig(n_r=0))
        lead = 16
        prog = np.zeros(round(100e-9 / TS) + 600)
        prog[lead:lead + round(100e-9 / TS)] = defaults.PULSE_AMP_PHI0
        from fluxcal.lti import gaussian_smooth

        w = gaussian_smooth(Waveform(prog, TS, t0=-lead * TS), defaults.SIGMA_FP_S)
        oracle = oracle_frequency_trace(line, w, m)
        bulk = (tr.t > 10e-9) & (tr.t < 90e-9)
        f_mid = np.interp(tr.t[bulk], oracle.t, oracle.f01)
        assert np.abs(tr.f01[bulk] - f_mid).max() < 1e6

    def test_reported_uncertainty_hits_published_anchors(self):
        m = device_model()
        pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, 100e-9, TS)
        sched = default_cryoscope_schedule()
        tr = run_cryoscope(identity_chain(), None, m, pulse, sched,
                           default_cryo_noise(seed=0))
        dtm = np.array([k2 - k1 for k1, k2 in sched.sample_pairs(TS)])
        fine = tr.sigma_f[dtm == 1]
        coarse = tr.sigma_f[dtm == 8]
        assert fine.mean() == pytest.approx(0.73e6, rel=0.02)
        assert coarse.mean() == pytest.approx(0.25e6, rel=0.02)

    def test_integration_time_scales_with_step_and_shots(self):
        m = device_model()
        pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, 100e-9, TS)
        sched = CryoscopeSchedule((((40e-9, 50e-9), 4),))
        cfg = NoiseConfig(n_r=1024, n_theta=16, seed=1)
        tr = run_cryoscope(identity_chain(), None, m, pulse, sched, cfg)
        expect = 4 * TS * math.sqrt(16 * 1024)
        np.testing.assert_allclose(tr.t_int, expect, rtol=1e-12)

    def test_noise_does_not_cause_phase_slips(self):
        m = device_model()
        line = build_line(paper_like_scenario(TS), TS)
        pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, 100e-9, TS)
        sched = default_cryoscope_schedule()
        quiet = run_cryoscope(line, None, m, pulse, sched, NoiseConfig(n_r=0))
        noisy = run_cryoscope(line, None, m, pulse, sched,
                              default_cryo_noise(seed=5))
        # a 2 pi slip at the finest step would show up as ~380 MHz
        assert np.abs(noisy.f01 - quiet.f01).max() < 5e7

    def test_bit_reproducible_and_seed_sensitive(self):
        m = device_model()
        pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, 40e-9, TS)
        sched = CryoscopeSchedule((((5e-9, 30e-9), 4),))
        a = run_cryoscope(identity_chain(), None, m, pulse, sched,
                          default_cryo_noise(seed=3))
        b = run_cryoscope(identity_chain(), None, m, pulse, sched,
                          default_cryo_noise(seed=3))
        c = run_cryoscope(identity_chain(), None, m, pulse, sched,
                          default_cryo_noise(seed=4))
        assert np.array_equal(a.f01, b.f01)
        assert not np.array_equal(a.f01, c.f01)

    def test_rejects_mismatched_sampling(self):
        m = device_model()
        pulse = rectangular_pulse(-0.1, 40e-9, 2 * TS)
        line = build_line(paper_like_scenario(TS), TS)
        with pytest.raises(ConfigurationError):
            run_cryoscope(line, None, m, pulse, default_cryoscope_schedule(),
                          NoiseConfig(n_r=0))


class TestSpectroscopy:
    def test_noiseless_rows_are_exact_gaussians(self):
        m = device_model(v_dc=defaults.SPEC_BIAS_PHI0)
        line = build_line(paper_like_scenario(TS), TS)
        grid = run_spectroscopy(line, None, m, t_grid=np.array([30e-9, 2e-6]),
                                noise=NoiseConfig(n_r=0))
        sig = 1.0 / (2 * math.pi * defaults.SIGMA_DRIVE_S)
        for ti in range(grid.t.size):
            fd = grid.f_drive[ti]
            center = fd[fd.size // 2]
            expect = np.exp(-((fd - center) ** 2) / (2 * sig**2))
            np.testing.assert_array_equal(grid.population[ti], expect)

    def test_settled_line_center_is_nu_plus_offset(self):
        m = device_model(v_dc=defaults.SPEC_BIAS_PHI0, spec_shift=1.1e6)
        grid = run_spectroscopy(identity_chain(), None, m,
                                t_grid=np.array([1e-6]),
                                noise=NoiseConfig(n_r=0))
        center = grid.f_drive[0, grid.f_drive.shape[1] // 2]
        assert center == pytest.approx(
            nu(m, defaults.SPEC_STEP_PHI0) + 1.1e6, abs=2.0
        )

    def test_offset_moves_center_one_to_one(self):
        base = device_model(v_dc=defaults.SPEC_BIAS_PHI0)
        shifted = device_model(v_dc=defaults.SPEC_BIAS_PHI0, spec_shift=2e6)
        t = np.array([5e-7])
        g0 = run_spectroscopy(identity_chain(), None, base, t_grid=t,
                              noise=NoiseConfig(n_r=0))
        g1 = run_spectroscopy(identity_chain(), None, shifted, t_grid=t,
                              noise=NoiseConfig(n_r=0))
        assert g1.f_drive[0, 20] - g0.f_drive[0, 20] == pytest.approx(2e6, abs=1e-3)

    def test_early_windows_average_over_the_edge(self):
        # a drive window straddling the step edge pulls the center toward
        # the idle frequency
        m = device_model(v_dc=defaults.SPEC_BIAS_PHI0)
        grid = run_spectroscopy(identity_chain(), None, m,
                                t_grid=np.array([10e-9, 1e-6]),
                                noise=NoiseConfig(n_r=0))
        early = grid.f_drive[0, 20]
        settled = grid.f_drive[1, 20]
        assert early > settled + 1e8

    def test_population_stays_in_unit_interval(self):
        m = device_model(v_dc=defaults.SPEC_BIAS_PHI0)
        grid = run_spectroscopy(identity_chain(), None, m,
                                t_grid=np.array([2e-7, 3e-6]),
                                noise=NoiseConfig(n_r=64, sigma_p_extra=0.2,
                                                  seed=9))
        assert grid.population.min() >= 0.0
        assert grid.population.max() <= 1.0

    def test_bit_reproducible_and_seed_sensitive(self):
        m = device_model(v_dc=defaults.SPEC_BIAS_PHI0)
        t = np.array([1e-7, 1e-5])
        mk = lambda s: run_spectroscopy(identity_chain(), None, m, t_grid=t,
                                        noise=NoiseConfig(n_r=512, seed=s))
        a, b, c = mk(7), mk(7), mk(8)
        assert np.array_equal(a.population, b.population)
        assert not np.array_equal(a.population, c.population)

    def test_rejects_readout_before_truncation(self):
        m = device_model()
        with pytest.raises(ConfigurationError):
            run_spectroscopy(identity_chain(), None, m, t_fl=2e-7, t_ro=1e-7)

    def test_default_time_grid_shape(self):
        t = default_time_grid()
        assert t.size == defaults.SPEC_N_TIMES
        assert t[0] == pytest.approx(defaults.SPEC_T_MIN_S)
        assert t[-1] == pytest.approx(defaults.SPEC_T_MAX_S)
        assert np.all(np.diff(np.log(t)) > 0)
