"""Target densities and shell geometry against closed-form oracles."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from mcmclab.targets import (
    DiagonalGaussianTarget,
    IsotropicGaussianTarget,
    NoisyMeanModel,
    half_volume_length_fraction,
    log_unnorm_density,
    radial_log_mass,
    shell_stats,
)
from mcmclab.harness import (
    NOISY_MEAN_OBSERVATIONS,
    NOISY_MEAN_PRIOR,
    noisy_mean_model,
)


def conjugate_posterior(observations, prior_mean, prior_sd):
    """Precision-weighted normal-normal posterior (independent oracle)."""
    precision = 1.0 / prior_sd**2
    weighted = prior_mean / prior_sd**2
    for value, sigma in observations:
        precision += 1.0 / sigma**2
        weighted += value / sigma**2
    return weighted / precision, 1.0 / np.sqrt(precision)


class TestLogUnnormDensity:
    def test_isotropic_at_mean_is_zero(self):
        target = IsotropicGaussianTarget(3, 1.0)
        assert log_unnorm_density(target, [0.0, 0.0, 0.0]) == 0.0

    def test_isotropic_1d_kernel_value(self):
        target = IsotropicGaussianTarget(1, 1.0)
        assert log_unnorm_density(target, [2.0]) == pytest.approx(-2.0, abs=1e-15)

    def test_noisy_mean_matches_conjugate_up_to_constant(self):
        model = noisy_mean_model()
        mean, sd = conjugate_posterior(NOISY_MEAN_OBSERVATIONS, *NOISY_MEAN_PRIOR)
        grid = np.array([27.0, 28.5, 29.44, 30.0, 31.5])
        ours = np.array([log_unnorm_density(model, [t]) for t in grid])
        oracle = norm.logpdf(grid, mean, sd)
        offsets = ours - oracle
        assert np.allclose(offsets, offsets[0], atol=1e-9)

    def test_dimension_mismatch_raises(self):
        target = IsotropicGaussianTarget(3, 1.0)
        with pytest.raises(ValueError):
            log_unnorm_density(target, [0.0, 0.0])

    def test_deterministic(self):
        target = DiagonalGaussianTarget((0.5, -1.0), (1.0, 2.0))
        theta = [0.3, 0.4]
        assert log_unnorm_density(target, theta) == log_unnorm_density(target, theta)

    def test_rotation_invariance(self):
        target = IsotropicGaussianTarget(4, 1.3)
        rng = np.random.default_rng(11)
        for _ in range(5):
            q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
            theta = rng.standard_normal(4)
            assert log_unnorm_density(target, q @ theta) == pytest.approx(
                log_unnorm_density(target, theta), rel=1e-12
            )

    def test_vectorized_matches_scalar(self):
        model = noisy_mean_model()
        pts = np.linspace(20, 35, 7).reshape(-1, 1)
        many = model.log_density_many(pts)
        each = [model.log_density(p) for p in pts]
        np.testing.assert_allclose(many, each, rtol=1e-13)

    def test_noisy_mean_without_observations_is_prior(self):
        model = NoisyMeanModel((), 25.0, 1.5)
        for t in (22.0, 25.0, 28.0):
            assert model.log_density([t]) == pytest.approx(
                norm.logpdf(t, 25.0, 1.5), rel=1e-12
            )


class TestNoisyMeanShape:
    def test_log_density_is_exactly_quadratic(self):
        # second finite difference of a quadratic is constant
        model = noisy_mean_model()
        ts = np.linspace(24.0, 34.0, 41)
        vals = model.log_density_many(ts.reshape(-1, 1))
        second = np.diff(vals, n=2)
        assert np.allclose(second, second[0], atol=1e-9)


class TestShellStats:
    def test_peak_radius_values(self):
        assert shell_stats(10, 1.0).r_peak == pytest.approx(3.0, abs=1e-12)
        assert shell_stats(1, 1.0).r_peak == 0.0
        assert shell_stats(26, 1.0).r_peak == pytest.approx(5.0, abs=1e-12)

    def test_mean_radius_large_d(self):
        stats = shell_stats(100, 1.0)
        assert stats.r_mean == pytest.approx(10.0, rel=5e-3)

    def test_shell_width_limit(self):
        stats = shell_stats(200, 1.0)
        assert stats.dr_mean == pytest.approx(1.0 / np.sqrt(2.0), rel=1e-2)

    def test_separation_scale(self):
        stats = shell_stats(8, 2.0)
        assert stats.dr_sep == pytest.approx(np.sqrt(16.0) * 2.0 / np.sqrt(2.0) * np.sqrt(2.0))
        assert stats.dr_sep == pytest.approx(np.sqrt(2.0 * 8) * 2.0)

    def test_mean_radius_exact_low_d(self):
        # d=2: sqrt(2) * Gamma(1.5)/Gamma(1) = sqrt(2) * sqrt(pi)/2 = sqrt(pi/2)
        assert shell_stats(2, 1.0).r_mean == pytest.approx(np.sqrt(np.pi / 2), rel=1e-12)

    def test_large_d_does_not_overflow(self):
        stats = shell_stats(10_000, 1.0)
        assert np.isfinite(stats.r_mean)
        assert stats.r_mean == pytest.approx(100.0, rel=1e-3)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            shell_stats(0, 1.0)
        with pytest.raises(ValueError):
            shell_stats(3, -1.0)


class TestRadialLogMass:
    def test_monotone_decreasing_in_1d(self):
        rs = np.linspace(0.0, 5.0, 200)
        vals = radial_log_mass(1, 1.0, rs)
        assert np.all(np.diff(vals) < 0)

    def test_argmax_matches_peak_radius(self):
        rs = np.arange(0.0, 6.0, 1e-3)
        vals = radial_log_mass(10, 1.0, rs)
        assert rs[np.argmax(vals)] == pytest.approx(3.0, abs=1e-3)

    def test_matches_3d_shell_integral_oracle(self):
        # direct shell mass: log(4 pi r^2 exp(-r^2/2)); equal up to a constant
        rs = np.linspace(0.4, 4.0, 25)
        ours = radial_log_mass(3, 1.0, rs)
        oracle = np.log(4.0 * np.pi * rs**2 * np.exp(-0.5 * rs**2))
        offsets = ours - oracle
        assert np.allclose(offsets, offsets[0], atol=1e-12)

    def test_zero_radius(self):
        assert radial_log_mass(5, 1.0, 0.0) == -np.inf
        assert radial_log_mass(1, 1.0, 0.0) == 0.0

    def test_unique_maximum_for_d_at_least_2(self):
        rs = np.arange(1e-4, 8.0, 1e-3)
        for d in (2, 4, 9):
            vals = radial_log_mass(d, 1.0, rs)
            peak = np.argmax(vals)
            assert rs[peak] == pytest.approx(np.sqrt(d - 1.0), abs=2e-3)
            # strictly unimodal: increasing before, decreasing after
            assert np.all(np.diff(vals[:peak]) > 0)
            assert np.all(np.diff(vals[peak + 1:]) < 0)


class TestHalfVolumeFraction:
    def test_values(self):
        assert half_volume_length_fraction(1) == 0.5
        assert half_volume_length_fraction(2) == pytest.approx(np.sqrt(0.5), rel=1e-12)
        assert half_volume_length_fraction(2) == pytest.approx(0.707, abs=5e-4)
        assert half_volume_length_fraction(15) == pytest.approx(0.955, abs=1e-3)

    def test_monotone_to_one(self):
        vals = [half_volume_length_fraction(d) for d in range(1, 60)]
        assert np.all(np.diff(vals) > 0)
        assert vals[-1] < 1.0


class TestConstruction:
    def test_isotropic_validation(self):
        with pytest.raises(ValueError):
            IsotropicGaussianTarget(0, 1.0)
        with pytest.raises(ValueError):
            IsotropicGaussianTarget(2, 0.0)

    def test_diagonal_validation(self):
        with pytest.raises(ValueError):
            DiagonalGaussianTarget((0.0,), (1.0, 2.0))
        with pytest.raises(ValueError):
            DiagonalGaussianTarget((0.0, 0.0), (1.0, -1.0))

    def test_noisy_mean_validation(self):
        with pytest.raises(ValueError):
            NoisyMeanModel(((1.0, 0.0),), 0.0, 1.0)
        with pytest.raises(ValueError):
            NoisyMeanModel((), 0.0, -2.0)

    def test_out_of_support_returns_neg_inf_not_error(self):
        # contract: zero density is -inf, never an exception
        class HalfLine(IsotropicGaussianTarget):
            def log_density(self, theta):
                if theta[0] < 0:
                    return -np.inf
                return super().log_density(theta)

        target = HalfLine(1, 1.0)
        assert log_unnorm_density(target, [-1.0]) == -np.inf


class TestNoisyMeanEvidenceOracle:
    def test_quadrature_matches_conjugate_marginal(self):
        # the normalized likelihood x prior integrates to the closed-form
        # marginal likelihood of the normal-normal model
        model = noisy_mean_model()
        z_quad, _ = quad(lambda t: np.exp(model.log_density([t])), 15.0, 45.0)
        values = np.array([v for v, _ in NOISY_MEAN_OBSERVATIONS])
        sigmas = np.array([s for _, s in NOISY_MEAN_OBSERVATIONS])
        mu0, sd0 = NOISY_MEAN_PRIOR
        # sequential 1-D marginals: each observation is Normal(mu_k, s_k^2 + sd_k^2)
        z_closed = 1.0
        mean_k, var_k = mu0, sd0**2
        for v, s in zip(values, sigmas):
            z_closed *= norm.pdf(v, mean_k, np.sqrt(var_k + s**2))
            post_prec = 1.0 / var_k + 1.0 / s**2
            mean_k = (mean_k / var_k + v / s**2) / post_prec
            var_k = 1.0 / post_prec
        assert z_quad == pytest.approx(z_closed, rel=1e-10)
