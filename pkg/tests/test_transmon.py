import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxcal import defaults
from fluxcal.errors import (
    ConfigurationError,
    DomainError,
    FitConvergenceError,
    ValidationError,
)
from fluxcal.transmon import (
    AnchorPoints,
    CorrectionTable,
    FrequencyModel,
    TransmonParams,
    _charge_hamiltonian,
    eigen_frequencies,
    ej_of_flux,
    f01_model,
    fit_parabola_vertex,
    fit_transmon,
    nu,
    nu_inverse,
    simulate_spec_shift,
)


def small_params(**kw):
    """Decoupled device with a cheap Hilbert space for fast checks."""
    base = dict(ec=2.0e8, ej_sum=2.0e10, d=0.4, omega_r=7.5e9, g=0.0,
                n_charge=10, n_res=2)
    base.update(kw)
    return TransmonParams(**base)


class TestParams:
    def test_rejects_nonpositive_energies(self):
        with pytest.raises(ValidationError):
            small_params(ec=0.0)
        with pytest.raises(ValidationError):
            small_params(ej_sum=-1.0)

    def test_rejects_bad_asymmetry(self):
        with pytest.raises(ValidationError):
            small_params(d=1.0)
        with pytest.raises(ValidationError):
            small_params(d=-0.1)

    def test_warns_outside_transmon_regime(self):
        with pytest.warns(UserWarning):
            TransmonParams(ec=1e9, ej_sum=5e9, d=0.4, omega_r=7.5e9, g=0.0)


class TestJosephsonEnergy:
    def test_extremes(self):
        p = small_params()
        assert ej_of_flux(p, 0.0) == pytest.approx(p.ej_sum, rel=1e-15)
        assert ej_of_flux(p, 0.5) == pytest.approx(p.d * p.ej_sum, rel=1e-12)

    @given(st.floats(-3.0, 3.0))
    def test_periodic_and_even(self, phi):
        p = small_params()
        assert ej_of_flux(p, phi) == pytest.approx(ej_of_flux(p, phi + 1.0), rel=1e-12)
        assert ej_of_flux(p, phi) == pytest.approx(ej_of_flux(p, -phi), rel=1e-12)

    @given(st.floats(-1.0, 1.0))
    def test_bounded_by_extremes(self, phi):
        p = small_params()
        e = ej_of_flux(p, phi)
        assert p.d * p.ej_sum - 1e-3 <= e <= p.ej_sum + 1e-3


class TestEigenfrequencies:
    def test_asymptotic_transmon_frequency(self):
        # deep transmon regime: f01 ~ sqrt(8 EJ EC) - EC to a few percent
        p = small_params(ej_sum=4.0e10, ec=1.5e8)
        f01, _ = eigen_frequencies(p, 0.0)
        approx = math.sqrt(8.0 * p.ej_sum * p.ec) - p.ec
        assert abs(f01 - approx) / f01 < 0.02

    def test_negative_anharmonicity_near_minus_ec(self):
        p = small_params(ej_sum=4.0e10, ec=1.5e8)
        f01, f12 = eigen_frequencies(p, 0.0)
        assert f12 < f01
        assert abs((f01 - f12) - p.ec) / p.ec < 0.15

    def test_decoupled_resonator_leaves_qubit_unchanged(self):
        # g = 0: dressed f01 must equal the bare charge-basis splitting
        p = small_params(g=0.0, n_res=3)
        f01, f12 = eigen_frequencies(p, 0.17)
        evals = np.linalg.eigvalsh(_charge_hamiltonian(p, 0.17))
        assert f01 == pytest.approx(evals[1] - evals[0], abs=1e-3)
        assert f12 == pytest.approx(evals[2] - evals[1], abs=1e-3)

    def test_coupling_repels_qubit_below_resonator(self):
        p0 = small_params(g=0.0, n_res=3)
        p1 = small_params(g=2.0e8, n_res=3)
        f0, _ = eigen_frequencies(p0, 0.0)
        f1, _ = eigen_frequencies(p1, 0.0)
        # qubit sits below the resonator, so dressing pushes it down
        assert f1 < f0
        assert f0 - f1 > 1e6

    def test_default_device_hits_published_operating_points(self):
        p = defaults.default_device()
        f01_0, f12_0 = eigen_frequencies(p, 0.0)
        f01_h, _ = eigen_frequencies(p, 0.5)
        assert f01_0 == pytest.approx(5.887e9, abs=1.0)
        assert f01_h == pytest.approx(4.151e9, abs=1.0)
        assert f12_0 - f01_0 == pytest.approx(-174e6, abs=1.0)


class TestFastEvaluator:
    def test_matches_direct_diagonalization(self):
        p = defaults.default_device()
        rng = np.random.default_rng(7)
        for phi in rng.uniform(-0.5, 0.5, 8):
            direct, _ = eigen_frequencies(p, phi)
            assert f01_model(p, phi) == pytest.approx(direct, abs=1e-2)

    def test_even_and_periodic_by_construction(self):
        p = defaults.default_device()
        for phi in (0.03, 0.21, 0.49):
            assert f01_model(p, phi) == f01_model(p, -phi)
            assert f01_model(p, phi) == f01_model(p, phi + 1.0)

    def test_sweet_spots_are_stationary(self):
        p = defaults.default_device()
        eps = 1e-5
        for phi0 in (0.0, 0.5):
            slope = (f01_model(p, phi0 + eps) - f01_model(p, phi0 - eps)) / (2 * eps)
            assert abs(slope) < 1.0e3  # Hz per Phi0

    def test_vectorized_matches_scalar(self):
        m = FrequencyModel(defaults.default_device())
        phis = np.linspace(-0.4, 0.1, 9)
        vec = nu(m, phis)
        assert vec.shape == phis.shape
        for i, phi in enumerate(phis):
            assert vec[i] == nu(m, float(phi))


class TestOperatingPoint:
    def test_flux_conversion(self):
        p = small_params(alpha_phi=2.0, v0=0.1)
        m = FrequencyModel(p, v_dc=0.3)
        assert m.total_flux(0.05) == pytest.approx(2.0 * 0.2 + 0.05, abs=1e-15)

    def test_correction_table_shifts_frequency(self):
        p = defaults.default_device()
        table = CorrectionTable(((-0.3, 2.0e6), (-0.1, -1.0e6)))
        plain = FrequencyModel(p)
        corrected = FrequencyModel(p, correction=table)
        assert nu(corrected, -0.3) == pytest.approx(nu(plain, -0.3) - 2.0e6, abs=1e-3)
        # linear interpolation between the nodes
        assert nu(corrected, -0.2) == pytest.approx(nu(plain, -0.2) - 0.5e6, abs=1e-3)
        # clamped outside
        assert nu(corrected, 0.4) == pytest.approx(nu(plain, 0.4) + 1.0e6, abs=1e-3)

    def test_correction_table_requires_increasing_abscissae(self):
        with pytest.raises(ValidationError):
            CorrectionTable(((0.2, 1.0), (0.1, 2.0)))

    def test_empty_table_is_identity(self):
        assert CorrectionTable().delta_f(0.3) == 0.0


class TestInverse:
    def test_roundtrip_on_both_default_branches(self):
        m = FrequencyModel(defaults.default_device())
        for branch in (defaults.CRYO_BRANCH_PHI0, (0.02, 0.45)):
            for phi in np.linspace(branch[0] + 0.01, branch[1] - 0.01, 7):
                f = nu(m, phi)
                assert nu_inverse(m, f, branch) == pytest.approx(phi, abs=1e-7)

    def test_rejects_frequency_outside_branch(self):
        m = FrequencyModel(defaults.default_device())
        with pytest.raises(DomainError):
            nu_inverse(m, 6.5e9, (-0.45, -0.005))

    def test_rejects_non_monotonic_branch(self):
        m = FrequencyModel(defaults.default_device())
        with pytest.raises(ConfigurationError):
            nu_inverse(m, 5.0e9, (-0.2, 0.2))


class TestParabolaVertex:
    def test_recovers_exact_vertex(self):
        x = np.linspace(-1.0, 2.0, 11)
        y = 3.0 - 4.0 * (x - 0.35) ** 2
        vx, vy = fit_parabola_vertex(x, y)
        assert vx == pytest.approx(0.35, abs=1e-12)
        assert vy == pytest.approx(3.0, abs=1e-12)

    def test_rejects_vertex_outside_scan(self):
        x = np.linspace(0.0, 1.0, 11)
        y = (x - 5.0) ** 2
        with pytest.raises(FitConvergenceError):
            fit_parabola_vertex(x, y)


class TestDeviceFit:
    def test_roundtrip_recovers_generating_device(self):
        truth = TransmonParams(ec=1.8e8, ej_sum=2.5e10, d=0.45,
                               omega_r=7.556e9, g=1.6e8,
                               alpha_phi=0.8, v0=0.02)
        m = FrequencyModel(truth, v_dc=0.0)

        def scan(center_v, half_width, n=9):
            v = np.linspace(center_v - half_width, center_v + half_width, n)
            f = np.array([f01_model(truth, truth.alpha_phi * (vv - truth.v0))
                          for vv in v])
            return np.column_stack([v, f])

        v_up = truth.v0
        v_dn = truth.v0 - 0.5 / truth.alpha_phi
        scans = (scan(v_up, 0.04), scan(v_dn, 0.04))
        anchors = AnchorPoints(
            f01_at_zero=eigen_frequencies(truth, 0.0)[0],
            f01_at_quarter=eigen_frequencies(truth, -0.25)[0],
            f01_at_half=eigen_frequencies(truth, -0.5)[0],
            f12_at_zero=eigen_frequencies(truth, 0.0)[1],
        )
        fit = fit_transmon(scans, anchors, omega_r=truth.omega_r)
        assert fit.alpha_phi == pytest.approx(truth.alpha_phi, rel=1e-6)
        assert fit.v0 == pytest.approx(truth.v0, abs=1e-9)
        assert fit.ec == pytest.approx(truth.ec, rel=1e-3)
        assert fit.ej_sum == pytest.approx(truth.ej_sum, rel=1e-3)
        assert fit.d == pytest.approx(truth.d, rel=1e-3)
        assert fit.g == pytest.approx(truth.g, rel=1e-2)

    def test_rejects_malformed_scans(self):
        with pytest.raises(ValidationError):
            fit_transmon((np.zeros((5, 2)),), AnchorPoints(5e9, 5e9, 4e9, 4.8e9),
                         omega_r=7.5e9)


class TestSpectroscopyShift:
    def test_two_level_drive_is_unbiased(self):
        p = defaults.default_device()
        shift = simulate_spec_shift(p, defaults.SIGMA_DRIVE_S, levels=2)
        assert abs(shift) < 1e4

    def test_second_state_pushes_line_up(self):
        p = defaults.default_device()
        shift = simulate_spec_shift(p, defaults.SIGMA_DRIVE_S, levels=3)
        # anharmonicity is negative, so the ac-Stark push is positive
        # and of order (Omega^2/2)/|anharm| ~ 1 MHz
        assert 0.3e6 < shift < 1.6e6

    def test_shift_shrinks_with_larger_anharmonicity(self):
        p = defaults.default_device()
        stiffer = TransmonParams(ec=2.0 * p.ec, ej_sum=p.ej_sum, d=p.d,
                                 omega_r=p.omega_r, g=p.g)
        s_soft = simulate_spec_shift(p, defaults.SIGMA_DRIVE_S, levels=3)
        s_stiff = simulate_spec_shift(stiffer, defaults.SIGMA_DRIVE_S, levels=3)
        assert 0 < s_stiff < s_soft

    def test_rejects_bad_arguments(self):
        p = defaults.default_device()
        with pytest.raises(ValidationError):
            simulate_spec_shift(p, -1e-9)
        with pytest.raises(ValidationError):
            simulate_spec_shift(p, 1e-8, levels=4)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.75, 0.75))
def test_frequency_model_folding_property(phi):
    p = defaults.default_device()
    assert f01_model(p, phi) == f01_model(p, -phi)
    # cos(pi (phi + 1)) is not bit-identical to -cos(pi phi), so the
    # period-1 image can differ in the last few ulp
    assert f01_model(p, phi) == pytest.approx(f01_model(p, phi + 1.0), rel=1e-9)


def test_spline_cache_reuses_sampler():
    p = defaults.default_device()
    from fluxcal.transmon import _f01_sampler

    assert _f01_sampler(p) is _f01_sampler(
        TransmonParams(p.ec, p.ej_sum, p.d, p.omega_r, p.g)
    )
