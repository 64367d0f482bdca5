import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spdc_lab.errors import UnsatisfiableConditionError
from spdc_lab.jsa import (
    MIN_GRID_RESOLUTION,
    SINC_GAUSS_ALPHA,
    BeamGeometry,
    delta_coefficients,
    gaussian_model_purity,
    geometry_factors,
    jsa_grid,
    mode_function,
    phase_mismatch_exact,
    phase_mismatch_linear,
    central_inverse_group_velocities,
    purity_waist,
    sinc_gaussian,
    walk_off_integral,
)
from spdc_lab.schmidt import schmidt_purity


def collinear(geom):
    return replace(geom, theta_s=0.0, theta_i=0.0)


class TestGeometryFactors:
    def test_frozen_degenerate(self, degenerate):
        g = geometry_factors(degenerate.geom)
        assert g.A == pytest.approx(1.05008016e8, rel=1e-8)
        assert g.C == pytest.approx(1.04670337e8, rel=1e-8)
        assert g.D == 0.0
        assert g.F == pytest.approx(3.37678798e5, rel=1e-8)
        assert g.H == pytest.approx(g.F, rel=1e-12)

    def test_frozen_nondegenerate(self, nondegenerate):
        g = geometry_factors(nondegenerate.geom)
        assert g.A == pytest.approx(3.60992279e7, rel=1e-8)
        assert g.C == pytest.approx(3.59935738e7, rel=1e-8)
        assert g.D == pytest.approx(5.40899976e5, rel=1e-8)
        assert g.F == pytest.approx(1.05654094e5, rel=1e-8)
        assert g.H == pytest.approx(1.03621975e5, rel=1e-8)

    def test_collinear_limits(self, degenerate):
        geom = collinear(degenerate.geom)
        g = geometry_factors(geom)
        assert g.A == pytest.approx(g.C, rel=1e-12)
        assert g.D == 0.0 and g.F == 0.0 and g.H == 0.0

    @given(
        wp=st.floats(20e-6, 2e-3),
        ws=st.floats(20e-6, 2e-3),
        wi=st.floats(20e-6, 2e-3),
        ts=st.floats(0.0, 0.099),
        ti=st.floats(0.0, 0.099),
    )
    @settings(max_examples=80, deadline=None)
    def test_invariants(self, degenerate, wp, ws, wi, ts, ti):
        geom = replace(
            degenerate.geom, W0p=wp, W0s=ws, W0i=wi, theta_s=ts, theta_i=ti
        )
        g = geometry_factors(geom)
        assert g.A >= g.C > 0
        assert g.F >= 0.0
        assert g.H >= 0.0
        # the walk-off factor never exceeds the bare transverse spread
        assert g.H <= g.F * (1 + 1e-12)


class TestPhaseMismatch:
    def test_centrally_matched(self, degenerate, nondegenerate):
        for cfg in (degenerate, nondegenerate):
            dky, dkz = phase_mismatch_exact(0.0, 0.0, cfg.geom, cfg.crystal)
            assert abs(float(dky)) < 1.0
            assert abs(float(dkz)) < 1.0

    def test_linear_is_linear(self, degenerate):
        cfg = degenerate
        ngv = central_inverse_group_velocities(cfg.geom, cfg.crystal)
        angles = (cfg.geom.theta_s, cfg.geom.theta_i)
        y1, z1 = phase_mismatch_linear(1e12, -2e12, ngv, angles)
        y2, z2 = phase_mismatch_linear(2e12, -4e12, ngv, angles)
        assert float(y2) == pytest.approx(2 * float(y1), rel=1e-12)
        assert float(z2) == pytest.approx(2 * float(z1), rel=1e-12)
        y0, z0 = phase_mismatch_linear(0.0, 0.0, ngv, angles)
        assert float(y0) == 0.0 and float(z0) == 0.0

    def test_linear_matches_exact_over_window(self, degenerate):
        # first-order expansion agrees with full dispersion to < 1% of the
        # mismatch scale across the filter window
        cfg = degenerate
        Om = np.linspace(-5e12, 5e12, 41)
        OS, OI = np.meshgrid(Om, Om, indexing="ij")
        y_ex, z_ex = phase_mismatch_exact(OS, OI, cfg.geom, cfg.crystal)
        ngv = central_inverse_group_velocities(cfg.geom, cfg.crystal)
        y_li, z_li = phase_mismatch_linear(
            OS, OI, ngv, (cfg.geom.theta_s, cfg.geom.theta_i)
        )
        z0 = float(phase_mismatch_exact(0.0, 0.0, cfg.geom, cfg.crystal)[1])
        scale_z = np.max(np.abs(z_ex - z0))
        scale_y = np.max(np.abs(y_ex))
        assert np.max(np.abs((z_ex - z0) - z_li)) < 0.01 * scale_z
        assert np.max(np.abs(y_ex - y_li)) < 0.01 * scale_y


class TestWalkOffIntegral:
    def test_at_origin(self, degenerate):
        L = degenerate.crystal.length_L
        assert walk_off_integral(0.0, 0.0, L) == pytest.approx(L, rel=1e-12)

    def test_sinc_identity(self, degenerate):
        # with the Gaussian envelope off the integral is the sinc transform
        L = degenerate.crystal.length_L
        for dkz in np.logspace(1, 6, 11):
            got = walk_off_integral(dkz, 0.0, L)
            want = L * np.sinc(dkz * L / 2.0 / math.pi)
            assert got.imag == 0.0
            assert got.real == pytest.approx(want, rel=1e-8, abs=1e-20 * L)

    def test_envelope_shrinks_overlap(self, degenerate):
        L = degenerate.crystal.length_L
        a = walk_off_integral(0.0, 3.4e5, L).real
        assert 0 < a < L

    def test_negative_H_rejected(self):
        with pytest.raises(ValueError):
            walk_off_integral(0.0, -1.0, 1e-4)


class TestModeFunction:
    def test_center_value(self, degenerate, nondegenerate):
        for cfg in (degenerate, nondegenerate):
            g = geometry_factors(cfg.geom)
            want = math.pi * cfg.crystal.length_L / math.sqrt(g.A * g.C)
            got = float(mode_function(0.0, 0.0, cfg.geom, cfg.crystal))
            assert got == pytest.approx(want, rel=1e-6)

    def test_degenerate_exchange_symmetry(self, degenerate):
        cfg = degenerate
        Om = np.linspace(-4e12, 4e12, 33)
        OS, OI = np.meshgrid(Om, Om, indexing="ij")
        amp = np.asarray(
            mode_function(OS, OI, cfg.geom, cfg.crystal), dtype=complex
        )
        assert np.allclose(amp, amp.T, rtol=1e-10, atol=0)

    def test_argmax_near_center(self, degenerate):
        cfg = degenerate
        grid = jsa_grid(
            101, cfg.geom, cfg.crystal, cfg.filters.signal, cfg.filters.idler
        )
        j, k = np.unravel_index(np.argmax(np.abs(grid.amplitude)), grid.amplitude.shape)
        assert abs(j - 50) <= 1 and abs(k - 50) <= 1

    def test_dispersion_modes_agree_near_center(self, degenerate):
        cfg = degenerate
        Om = np.linspace(-2e12, 2e12, 21)
        OS, OI = np.meshgrid(Om, Om, indexing="ij")
        a = np.abs(mode_function(OS, OI, cfg.geom, cfg.crystal, "exact"))
        b = np.abs(mode_function(OS, OI, cfg.geom, cfg.crystal, "linear"))
        assert np.max(np.abs(a - b)) < 0.01 * np.max(a)

    def test_bad_dispersion_mode(self, degenerate):
        with pytest.raises(ValueError):
            mode_function(0.0, 0.0, degenerate.geom, degenerate.crystal, "cubic")


class TestJsaGrid:
    def test_resolution_floor(self, degenerate):
        cfg = degenerate
        with pytest.raises(ValueError):
            jsa_grid(
                MIN_GRID_RESOLUTION - 1,
                cfg.geom,
                cfg.crystal,
                cfg.filters.signal,
                cfg.filters.idler,
            )

    def test_normalization(self, degenerate):
        cfg = degenerate
        grid = jsa_grid(
            101, cfg.geom, cfg.crystal, cfg.filters.signal, cfg.filters.idler
        )
        dens = np.abs(grid.amplitude) ** 2
        total = np.trapezoid(
            np.trapezoid(dens, grid.omega_i_samples, axis=1), grid.omega_s_samples
        )
        assert grid.normalization_N * total == pytest.approx(1.0, rel=1e-12)

    def test_purity_grid_refinement(self, degenerate):
        cfg = degenerate
        vals = []
        for res in (201, 401):
            grid = jsa_grid(
                res, cfg.geom, cfg.crystal, cfg.filters.signal, cfg.filters.idler
            )
            vals.append(schmidt_purity(grid).purity)
        assert abs(vals[1] - vals[0]) < 1e-3

    def test_narrow_pump_band_concentrates_sum_frequency(self, degenerate):
        # as the pump bandwidth shrinks the joint density collapses onto the
        # anti-diagonal Omega_s + Omega_i = 0
        cfg = degenerate
        geom = replace(cfg.geom, pump_bandwidth_Bp=1e10)
        grid = jsa_grid(
            201, geom, cfg.crystal, cfg.filters.signal, cfg.filters.idler
        )
        OS = grid.omega_s_samples[:, None] - geom.signal.central_angular_frequency
        OI = grid.omega_i_samples[None, :] - geom.idler.central_angular_frequency
        dens = np.abs(grid.amplitude) ** 2
        band = np.abs(OS + OI) < 5e10
        assert dens[band].sum() > 0.999 * dens.sum()


class TestDeltaCoefficients:
    def test_frozen_degenerate(self, degenerate):
        d = delta_coefficients(degenerate.geom, degenerate.crystal)
        assert d.delta_s == pytest.approx(1.814861e-27, rel=1e-6)
        assert d.delta_i == pytest.approx(d.delta_s, rel=1e-12)
        assert d.delta_si == pytest.approx(7.390311e-28, rel=1e-6)

    def test_frozen_consistent(self, degenerate):
        d = delta_coefficients(
            degenerate.geom, degenerate.crystal, alpha_convention="consistent"
        )
        assert d.delta_s == pytest.approx(2.678944e-27, rel=1e-6)
        assert d.delta_si == pytest.approx(1.603114e-27, rel=1e-6)

    def test_unknown_convention(self, degenerate):
        with pytest.raises(ValueError):
            delta_coefficients(degenerate.geom, degenerate.crystal, "other")

    def test_collinear_cross_term_positive(self, degenerate):
        # with zero emission angles the angular terms vanish and the cross
        # coefficient is strictly positive, so no separable point exists
        geom = collinear(degenerate.geom)
        d = delta_coefficients(geom, degenerate.crystal)
        assert d.delta_si > 0

    @pytest.mark.parametrize("conv", ["paper_literal", "consistent"])
    def test_cross_term_vanishes_at_closed_form_waist(self, degenerate, conv):
        cfg = degenerate
        w = purity_waist(cfg.geom.W0p, cfg.geom, cfg.crystal, alpha_convention=conv)
        geom = replace(cfg.geom, W0s=w, W0i=w)
        d = delta_coefficients(geom, cfg.crystal, alpha_convention=conv)
        assert abs(d.delta_si) <= 1e-10 * max(d.delta_s, d.delta_i)


class TestPurityWaist:
    def test_frozen_values(self, degenerate, nondegenerate):
        assert purity_waist(
            degenerate.geom.W0p, degenerate.geom, degenerate.crystal
        ) == pytest.approx(243.2257e-6, rel=1e-6)
        assert purity_waist(
            degenerate.geom.W0p,
            degenerate.geom,
            degenerate.crystal,
            alpha_convention="consistent",
        ) == pytest.approx(354.1225e-6, rel=1e-6)
        assert purity_waist(
            nondegenerate.geom.W0p, nondegenerate.geom, nondegenerate.crystal
        ) == pytest.approx(305.2957e-6, rel=1e-6)

    @pytest.mark.xfail(
        reason="published closed-form collection waist of about 309 um for the "
        "degenerate layout is not reproduced; this implementation yields "
        "243.2 um (see decisions ledger)",
        strict=True,
    )
    def test_published_degenerate_value(self, degenerate):
        w = purity_waist(degenerate.geom.W0p, degenerate.geom, degenerate.crystal)
        assert w == pytest.approx(309e-6, rel=0.02)

    def test_unsatisfiable_at_zero_angle(self, degenerate):
        geom = collinear(degenerate.geom)
        with pytest.raises(UnsatisfiableConditionError):
            purity_waist(geom.W0p, geom, degenerate.crystal)

    def test_unsatisfiable_for_tiny_pump_waist(self, degenerate):
        with pytest.raises(UnsatisfiableConditionError):
            purity_waist(5e-6, degenerate.geom, degenerate.crystal)


class TestGaussianModel:
    def test_sinc_gaussian_values(self):
        assert float(sinc_gaussian(0.0)) == 1.0
        assert float(sinc_gaussian(1.0)) == pytest.approx(
            math.exp(-SINC_GAUSS_ALPHA), rel=1e-12
        )
        x_e = 1.0 / math.sqrt(SINC_GAUSS_ALPHA)
        assert float(sinc_gaussian(x_e)) == pytest.approx(1.0 / math.e, rel=1e-12)
        assert x_e == pytest.approx(1.4825, abs=1e-4)

    def test_separable_form_is_pure(self, degenerate):
        cfg = degenerate
        w = purity_waist(cfg.geom.W0p, cfg.geom, cfg.crystal)
        geom = replace(cfg.geom, W0s=w, W0i=w)
        d = delta_coefficients(geom, cfg.crystal)
        assert gaussian_model_purity(d) == pytest.approx(1.0, abs=1e-12)

    def test_analytic_vs_svd(self, degenerate):
        # the closed-form Mehler-kernel purity must agree with a dense SVD of
        # the same Gaussian amplitude
        d = delta_coefficients(
            degenerate.geom, degenerate.crystal, alpha_convention="consistent"
        )
        s = math.sqrt(max(d.delta_s, d.delta_i))
        x = np.linspace(-6, 6, 801) / s
        X, Y = np.meshgrid(x, x, indexing="ij")
        amp = np.exp(
            -(d.delta_s * X**2 + d.delta_i * Y**2 + 2 * d.delta_si * X * Y) / 2.0
        )
        svd_p = schmidt_purity(amp).purity
        assert gaussian_model_purity(d) == pytest.approx(svd_p, abs=1e-3)

    def test_not_positive_definite(self):
        from spdc_lab.jsa import DeltaCoefficients

        with pytest.raises(ValueError):
            gaussian_model_purity(DeltaCoefficients(1.0, 1.0, 1.5))


class TestBeamGeometry:
    def test_validation(self, degenerate):
        geom = degenerate.geom
        with pytest.raises(ValueError):
            replace(geom, W0p=0.0)
        with pytest.raises(ValueError):
            replace(geom, theta_s=0.2)
        with pytest.raises(ValueError):
            replace(geom, pump_bandwidth_Bp=-1.0)

    def test_role_accessors(self, degenerate):
        geom = degenerate.geom
        assert geom.pump.role == "pump"
        assert geom.signal.role == "signal"
        assert geom.idler.role == "idler"
