"""Tests for the single-site Gibbs sampler on the TV image posterior."""

import math

import numpy as np
import pytest
from scipy.special import ndtr, ndtri

from hjbd.errors import ValidationError
from hjbd.gibbs import (
    McmcResult,
    PiecewiseGaussian1D,
    SamplerConfig,
    conditional_density,
    posterior_mean_mcmc,
    sample_piecewise_gaussian,
)
from hjbd.imaging import Image
from hjbd.posterior import (
    EstimatorParams,
    QuadratureConfig,
    posterior_expectations,
)
from hjbd.priors import AnisotropicTV2DPrior


def _conditional_trapz_moments(state, idx, x, t, eps, lam):
    """Brute-force conditional mean/variance on a dense grid."""
    i, j = idx
    h, w = state.shape
    neighbors = []
    if i > 0:
        neighbors.append(state[i - 1, j])
    if i < h - 1:
        neighbors.append(state[i + 1, j])
    if j > 0:
        neighbors.append(state[i, j - 1])
    if j < w - 1:
        neighbors.append(state[i, j + 1])
    xij = x.pixels[i, j]
    span = 30.0 * math.sqrt(t * eps) + 5.0 * t * lam * max(1, len(neighbors))
    lo = min([xij] + neighbors) - span
    hi = max([xij] + neighbors) + span
    y = np.linspace(lo, hi, 800001)
    loge = -((xij - y) ** 2 / (2.0 * t)
             + lam * sum(np.abs(y - v) for v in neighbors)) / eps
    dens = np.exp(loge - loge.max())
    z = np.trapezoid(dens, y)
    mean = np.trapezoid(dens * y, y) / z
    var = np.trapezoid(dens * (y - mean) ** 2, y) / z
    return mean, var


class TestSamplerConfig:
    def test_defaults(self):
        cfg = SamplerConfig()
        assert cfg.sweeps == 20000
        assert cfg.burn_in == 2000
        assert cfg.chains == 4
        assert cfg.thin == 1

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"sweeps": 100, "burn_in": 100},
            {"sweeps": 50, "burn_in": 100},
            {"burn_in": -1},
            {"chains": 0},
            {"thin": 0},
            {"seed": -1},
            {"seed": 2**64},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValidationError):
            SamplerConfig(**kwargs)


class TestPiecewiseGaussian1D:
    def test_requires_matching_segment_arrays(self):
        with pytest.raises(ValidationError):
            PiecewiseGaussian1D(np.array([0.0]), np.array([1.0]),
                                np.array([0.0]), np.array([0.0]))

    def test_requires_sorted_breakpoints(self):
        ones = np.ones(3)
        with pytest.raises(ValidationError):
            PiecewiseGaussian1D(np.array([1.0, 0.0]), ones, 0 * ones, 0 * ones)

    def test_requires_positive_curvature(self):
        with pytest.raises(ValidationError):
            PiecewiseGaussian1D(np.array([]), np.array([-1.0]),
                                np.array([0.0]), np.array([0.0]))

    def test_requires_continuity(self):
        # a jump in b at the breakpoint without a compensating c
        with pytest.raises(ValidationError):
            PiecewiseGaussian1D(np.array([1.0]), np.array([1.0, 1.0]),
                                np.array([0.0, 2.0]), np.array([0.0, 0.0]))

    def test_accepts_compensated_slope_change(self):
        # exponents match at the breakpoint v=1: -0*1+0 == -2*1+2
        pg = PiecewiseGaussian1D(np.array([1.0]), np.array([1.0, 1.0]),
                                 np.array([0.0, 2.0]), np.array([0.0, 2.0]))
        assert pg.a.size == 2

    def test_standard_gaussian_mass_and_moments(self):
        pg = PiecewiseGaussian1D(np.array([]), np.array([1.0]),
                                 np.array([0.0]), np.array([0.0]))
        assert pg.log_masses()[0] == pytest.approx(0.5 * math.log(2 * math.pi))
        mean, var = pg.moments()
        assert mean == pytest.approx(0.0, abs=1e-14)
        assert var == pytest.approx(1.0, rel=1e-12)

    def test_split_gaussian_moments_unchanged(self):
        ones = np.ones(3)
        pg = PiecewiseGaussian1D(np.array([-0.3, 0.7]), ones, 0 * ones, 0 * ones)
        mean, var = pg.moments()
        assert mean == pytest.approx(0.0, abs=1e-13)
        assert var == pytest.approx(1.0, rel=1e-12)

    def test_duplicate_breakpoints_carry_zero_mass(self):
        ones = np.ones(3)
        pg = PiecewiseGaussian1D(np.array([0.5, 0.5]), ones, 0 * ones, 0 * ones)
        masses = pg.log_masses()
        assert masses[1] == -math.inf
        mean, var = pg.moments()
        assert mean == pytest.approx(0.0, abs=1e-13)
        assert var == pytest.approx(1.0, rel=1e-12)


class TestConditionalDensity:
    def test_equal_neighbors_centered_data(self):
        state = np.full((3, 3), 10.0)
        x = Image.from_array(state.copy())
        pg = conditional_density(state, (1, 1), x, t=2.0, eps=1.0, lam=0.5)
        assert pg.a.size == 5
        np.testing.assert_array_equal(pg.breakpoints, np.full(4, 10.0))
        mean, var = pg.moments()
        assert mean == pytest.approx(10.0, abs=1e-12)
        assert 0 < var < 2.0 * 1.0

    def test_segment_counts_by_position(self):
        state = np.arange(9.0).reshape(3, 3)
        x = Image.from_array(state.copy())
        corner = conditional_density(state, (0, 0), x, 1.0, 1.0, 1.0)
        edge = conditional_density(state, (0, 1), x, 1.0, 1.0, 1.0)
        interior = conditional_density(state, (1, 1), x, 1.0, 1.0, 1.0)
        assert corner.a.size == 3
        assert edge.a.size == 4
        assert interior.a.size == 5

    def test_two_pixel_image_has_two_segments(self):
        state = np.array([[100.0, 120.0]])
        x = Image.from_array(state.copy())
        pg = conditional_density(state, (0, 0), x, 20.0, 20.0, 1.0)
        assert pg.a.size == 2
        np.testing.assert_array_equal(pg.breakpoints, [120.0])

    def test_single_pixel_image_is_plain_gaussian(self):
        state = np.array([[7.0]])
        x = Image.from_array(state.copy())
        pg = conditional_density(state, (0, 0), x, t=3.0, eps=0.5, lam=1.0)
        assert pg.breakpoints.size == 0
        mean, var = pg.moments()
        assert mean == pytest.approx(7.0, abs=1e-12)
        assert var == pytest.approx(3.0 * 0.5, rel=1e-12)

    def test_curvature_and_segment_means(self):
        t, eps, lam = 2.5, 0.8, 1.3
        state = np.array([[1.0, 5.0], [3.0, -2.0]])
        x = Image.from_array(np.array([[4.0, 0.0], [0.0, 0.0]]))
        pg = conditional_density(state, (0, 0), x, t, eps, lam)
        np.testing.assert_allclose(pg.a, 1.0 / (t * eps))
        big_k = pg.breakpoints.size
        slopes = 2.0 * np.arange(big_k + 1) - big_k
        np.testing.assert_allclose(pg.b / pg.a, 4.0 - t * lam * slopes,
                                   rtol=1e-13)

    @pytest.mark.parametrize("idx", [(0, 0), (1, 2), (1, 1)])
    def test_moments_match_dense_grid(self, idx):
        rng = np.random.default_rng(42)
        state = rng.uniform(-5, 5, (3, 4))
        x = Image.from_array(rng.uniform(-5, 5, (3, 4)))
        t, eps, lam = 1.7, 0.6, 0.9
        pg = conditional_density(state, idx, x, t, eps, lam)
        mean, var = pg.moments()
        ref_mean, ref_var = _conditional_trapz_moments(
            state, idx, x, t, eps, lam)
        assert mean == pytest.approx(ref_mean, abs=1e-8)
        assert var == pytest.approx(ref_var, rel=1e-7)

    def test_validation(self):
        state = np.zeros((2, 2))
        x = Image.from_array(np.zeros((2, 2)))
        with pytest.raises(ValidationError):
            conditional_density(state, (2, 0), x, 1.0, 1.0, 1.0)
        with pytest.raises(ValidationError):
            conditional_density(np.zeros((3, 2)), (0, 0), x, 1.0, 1.0, 1.0)
        with pytest.raises(ValidationError):
            conditional_density(state, (0, 0), x, 0.0, 1.0, 1.0)
        with pytest.raises(ValidationError):
            conditional_density(state, (0, 0), x, 1.0, -1.0, 1.0)
        with pytest.raises(ValidationError):
            conditional_density(state, (0, 0), np.zeros((2, 2)), 1.0, 1.0, 1.0)


class TestSamplePiecewiseGaussian:
    def test_standard_gaussian_sample_mean(self):
        pg = PiecewiseGaussian1D(np.array([]), np.array([1.0]),
                                 np.array([0.0]), np.array([0.0]))
        rng = np.random.default_rng(123)
        draws = np.array([sample_piecewise_gaussian(pg, rng)
                          for _ in range(100000)])
        assert abs(draws.mean()) < 0.02
        assert draws.var() == pytest.approx(1.0, abs=0.05)

    def test_symmetric_split_median(self):
        ones = np.ones(2)
        pg = PiecewiseGaussian1D(np.array([0.0]), ones, 0 * ones, 0 * ones)
        rng = np.random.default_rng(7)
        draws = np.array([sample_piecewise_gaussian(pg, rng)
                          for _ in range(100000)])
        assert abs(np.median(draws)) < 0.02

    def test_segment_frequencies_match_masses(self):
        # split a standard Gaussian at its 0.9 quantile
        v = float(ndtri(0.9))
        ones = np.ones(2)
        pg = PiecewiseGaussian1D(np.array([v]), ones, 0 * ones, 0 * ones)
        rng = np.random.default_rng(2024)
        draws = np.array([sample_piecewise_gaussian(pg, rng)
                          for _ in range(100000)])
        assert np.mean(draws <= v) == pytest.approx(0.9, abs=0.01)

    def test_quantile_inversion_accuracy(self):
        from hjbd.gibbs import _invert_truncated_cdf_bisect

        zlo, zhi = -1.0, 2.0
        delta = ndtr(zhi) - ndtr(zlo)
        for u in (1e-10, 0.2, 0.5, 0.9, 1.0 - 1e-10):
            y = _invert_truncated_cdf_bisect(0.0, 1.0, zlo, zhi, u)
            assert zlo <= y <= zhi
            cdf = (ndtr(y) - ndtr(zlo)) / delta
            assert cdf == pytest.approx(u, abs=1e-9)

    def test_far_tail_segment(self):
        from hjbd.gibbs import _invert_truncated_cdf_bisect, _log_phi_diff

        y = _invert_truncated_cdf_bisect(0.0, 1.0, 30.0, 31.0, 0.5)
        assert 30.0 < y < 31.0
        frac = math.exp(_log_phi_diff(30.0, y) - _log_phi_diff(30.0, 31.0))
        assert frac == pytest.approx(0.5, abs=1e-10)

    def test_draws_respect_chosen_segment_support(self):
        ones = np.ones(2)
        pg = PiecewiseGaussian1D(np.array([0.4]), ones, 0.4 * ones, 0.08 * ones)
        rng = np.random.default_rng(5)
        draws = np.array([sample_piecewise_gaussian(pg, rng)
                          for _ in range(2000)])
        assert np.all(np.isfinite(draws))


class TestPosteriorMeanMcmc:
    def test_single_pixel_matches_gaussian(self):
        x = Image.from_array(np.array([[12.0]]))
        cfg = SamplerConfig(sweeps=6000, burn_in=500, seed=3, chains=4)
        res = posterior_mean_mcmc(x, 2.0, 1.5, 1.0, cfg)
        err = abs(res.mean_image.pixels[0, 0] - 12.0)
        assert err <= 3.0 * res.stderr_image.pixels[0, 0]
        assert res.var_image.pixels[0, 0] == pytest.approx(3.0, rel=0.1)
        assert res.converged

    def test_constant_image_mean_preserved(self):
        x = Image.from_array(np.full((6, 6), 50.0))
        cfg = SamplerConfig(sweeps=4000, burn_in=500, seed=0, chains=4)
        res = posterior_mean_mcmc(x, 2.0, 1.0, 0.5, cfg)
        dev = np.abs(res.mean_image.pixels - 50.0)
        assert np.all(dev <= 3.0 * res.stderr_image.pixels)
        assert res.rhat_max < 1.05

    def test_two_pixel_matches_quadrature(self):
        x = Image.from_array(np.array([[100.0, 120.0]]))
        t, eps, lam = 20.0, 20.0, 1.0
        cfg = SamplerConfig(sweeps=8000, burn_in=1000, seed=17, chains=4)
        res = posterior_mean_mcmc(x, t, eps, lam, cfg)
        prior = AnisotropicTV2DPrior(lam=lam, width=2, height=1)
        quad_cfg = QuadratureConfig(nodes_per_dim=401, refine_tol=1e-5,
                                    max_refine=3)
        summary, extras = posterior_expectations(
            prior, x.pixels.ravel(), EstimatorParams(t=t, eps=eps),
            [lambda y: y**2], quad_cfg)
        diff = np.abs(res.mean_image.pixels.ravel() - summary.u_pm)
        assert np.all(diff <= 3.0 * res.stderr_image.pixels.ravel())
        # marginal variances, with a Gaussian-approximation MCSE for the
        # sampler's variance estimate
        var_quad = extras[0] - summary.u_pm**2
        var_gibbs = res.var_image.pixels.ravel()
        se_var = var_quad * math.sqrt(2.0 / res.accepted_sweeps)
        assert np.all(np.abs(var_gibbs - var_quad) <= 3.0 * se_var)
        assert res.rhat_max <= 1.05

    def test_mean_square_residual_bounded(self):
        rng = np.random.default_rng(8)
        x = Image.from_array(rng.uniform(0, 255, (5, 5)))
        t, eps, lam = 4.0, 2.0, 0.7
        cfg = SamplerConfig(sweeps=4000, burn_in=500, seed=14, chains=4)
        res = posterior_mean_mcmc(x, t, eps, lam, cfg)
        n = x.pixels.size
        assert res.var_image.pixels.sum() <= n * t * eps * 1.01

    def test_bit_identical_reruns(self):
        x = Image.from_array(np.array([[1.0, 4.0], [2.0, 8.0]]))
        cfg = SamplerConfig(sweeps=300, burn_in=50, seed=99, chains=2)
        first = posterior_mean_mcmc(x, 1.0, 1.0, 1.0, cfg)
        second = posterior_mean_mcmc(x, 1.0, 1.0, 1.0, cfg)
        np.testing.assert_array_equal(first.mean_image.pixels,
                                      second.mean_image.pixels)
        np.testing.assert_array_equal(first.stderr_image.pixels,
                                      second.stderr_image.pixels)
        np.testing.assert_array_equal(first.var_image.pixels,
                                      second.var_image.pixels)
        assert first.rhat_max == second.rhat_max

    def test_seed_changes_output(self):
        x = Image.from_array(np.array([[1.0, 4.0], [2.0, 8.0]]))
        base = SamplerConfig(sweeps=300, burn_in=50, seed=99, chains=2)
        other = SamplerConfig(sweeps=300, burn_in=50, seed=100, chains=2)
        a = posterior_mean_mcmc(x, 1.0, 1.0, 1.0, base)
        b = posterior_mean_mcmc(x, 1.0, 1.0, 1.0, other)
        assert not np.array_equal(a.mean_image.pixels, b.mean_image.pixels)

    def test_accepted_sweeps_accounting(self):
        x = Image.from_array(np.array([[3.0]]))
        cfg = SamplerConfig(sweeps=103, burn_in=3, thin=2, seed=1, chains=3)
        res = posterior_mean_mcmc(x, 1.0, 1.0, 1.0, cfg)
        # ceil(100/2) = 50 kept per chain, 2 halves of 25, 3 chains
        assert res.accepted_sweeps == 3 * 2 * 25

    def test_flags_non_convergence_without_raising(self):
        halves = np.zeros((16, 16))
        halves[:, 8:] = 255.0
        x = Image.from_array(halves)
        cfg = SamplerConfig(sweeps=30, burn_in=2, seed=11, chains=3)
        res = posterior_mean_mcmc(x, 2000.0, 0.005, 5.0, cfg)
        assert res.rhat_max > 1.1
        assert not res.converged
        assert isinstance(res, McmcResult)

    def test_diagnostic_invariants(self):
        x = Image.from_array(np.array([[0.0, 10.0]]))
        cfg = SamplerConfig(sweeps=500, burn_in=100, seed=2, chains=2)
        res = posterior_mean_mcmc(x, 1.0, 1.0, 1.0, cfg)
        assert res.rhat_max >= 1.0 - 1e-9
        assert np.all(res.stderr_image.pixels >= 0)
        assert np.all(res.var_image.pixels >= 0)

    def test_validation(self):
        x = Image.from_array(np.array([[1.0]]))
        with pytest.raises(ValidationError):
            posterior_mean_mcmc(np.array([[1.0]]), 1.0, 1.0, 1.0)
        with pytest.raises(ValidationError):
            posterior_mean_mcmc(x, 0.0, 1.0, 1.0)
        with pytest.raises(ValidationError):
            posterior_mean_mcmc(x, 1.0, 1.0, math.inf)
        with pytest.raises(ValidationError):
            # only 3 kept samples: too few for split halves
            posterior_mean_mcmc(x, 1.0, 1.0, 1.0,
                                SamplerConfig(sweeps=103, burn_in=100))
