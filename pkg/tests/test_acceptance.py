"""Acceptance gate: one test per shipping criterion, each at its stated
tolerance and runtime budget.  These run the public API end to end; the
slow image-scale criteria reuse a module-scoped first run so the final
determinism criterion can repeat the identical computation."""

import math
import time

import numpy as np
import pytest

from hjbd.envelope import Grid1D
from hjbd.gibbs import SamplerConfig, posterior_mean_mcmc
from hjbd.imaging import (
    Image,
    NoiseSpec,
    add_gaussian_noise,
    plateau_fraction,
    psnr,
    rof_map,
)
from hjbd.posterior import (
    EstimatorParams,
    QuadratureConfig,
    posterior_expectations,
    posterior_summary_quadrature,
    u_pm_closed_l1,
)
from hjbd.priors import (
    AnisotropicTV2DPrior,
    BallIndicatorPrior,
    QuadraticPrior,
    WeightedL1Prior,
    ZeroPrior,
)
from hjbd.verification import (
    _synthetic_scene,
    check_bregman_risk_1d,
    check_eps_to_zero,
    check_hj_residual,
    check_map_pm_distance,
    check_moreau_decomposition_1d,
    check_mse_bound,
    check_nonexpansive_monotone,
    check_t_to_zero,
    check_topology,
)

BOUND_PRIORS = (ZeroPrior(), QuadraticPrior(1.0), WeightedL1Prior([2.0]))


def _loguniform(rng, lo, hi):
    return float(np.exp(rng.uniform(math.log(lo), math.log(hi))))


# --- two-pixel sampler-vs-quadrature study (criteria 9 and 11) -------------

def _two_pixel_cases():
    rng = np.random.default_rng([2026, 9])
    cases = [((100.0, 120.0), 20.0, 20.0, 1.0)]
    for _ in range(9):
        x_pair = tuple(rng.uniform(0, 255, 2))
        cases.append((x_pair, _loguniform(rng, 2, 50),
                      _loguniform(rng, 2, 50), _loguniform(rng, 0.2, 2)))
    return cases


def _run_two_pixel_samplers():
    results = []
    for i, (x_pair, t, eps, lam) in enumerate(_two_pixel_cases()):
        img = Image.from_array(np.array([list(x_pair)]))
        cfg = SamplerConfig(sweeps=8000, burn_in=1000, seed=100 + i, chains=4)
        results.append(posterior_mean_mcmc(img, t, eps, lam, cfg))
    return results


@pytest.fixture(scope="module")
def two_pixel_first_run():
    start = time.perf_counter()
    results = _run_two_pixel_samplers()
    return results, time.perf_counter() - start


# --- staircasing pipeline (criteria 10 and 11) ------------------------------

STAIRCASE_CFG = SamplerConfig(sweeps=20000, burn_in=2000, seed=0, chains=2)


def _run_staircase_pipeline():
    clean = _synthetic_scene(64)
    noisy = add_gaussian_noise(clean, NoiseSpec(sigma=20.0,
                                                seed=STAIRCASE_CFG.seed))
    map_img = rof_map(noisy, 20.0, 1.0)
    pm = posterior_mean_mcmc(noisy, 20.0, 20.0, 1.0, STAIRCASE_CFG)
    report = {
        "plateau_map": plateau_fraction(map_img, 1e-6),
        "plateau_pm": plateau_fraction(pm.mean_image, 1e-6),
        "rhat_max": pm.rhat_max,
        "psnr_noisy": psnr(clean, noisy),
        "psnr_map": psnr(clean, map_img),
        "psnr_pm": psnr(clean, pm.mean_image),
    }
    return map_img, pm, report


@pytest.fixture(scope="module")
def staircase_first_run():
    start = time.perf_counter()
    map_img, pm, report = _run_staircase_pipeline()
    return map_img, pm, report, time.perf_counter() - start


# --- the criteria -----------------------------------------------------------

def test_criterion_01_tikhonov_closed_forms_match_quadrature():
    start = time.perf_counter()
    rng = np.random.default_rng([2026, 1])
    worst = 0.0
    for _ in range(1000):
        m = _loguniform(rng, 0.05, 10)
        x = rng.uniform(-10, 10, 1)
        params = EstimatorParams(t=_loguniform(rng, 0.05, 50),
                                 eps=_loguniform(rng, 0.01, 50))
        got = posterior_summary_quadrature(QuadraticPrior(m), x, params)
        shrink = 1.0 + m * params.t
        s_ref = m * x[0] ** 2 / (2 * shrink) + (params.eps / 2) * math.log(shrink)
        u_ref = x[0] / shrink
        mse_ref = params.t * params.eps / shrink
        worst = max(worst,
                    abs(got.s_eps - s_ref) / abs(s_ref),
                    abs(got.u_pm[0] - u_ref) / abs(u_ref),
                    abs(got.mse - mse_ref) / mse_ref)
    elapsed = time.perf_counter() - start
    assert worst <= 1e-6, worst
    assert elapsed < 10.0, elapsed


def test_criterion_02_soft_threshold_family_matches_and_interpolates():
    start = time.perf_counter()
    t, lam = 1.25, 2.0
    xs = np.linspace(-100, 100, 201)
    soft = np.sign(xs) * np.maximum(np.abs(xs) - t * lam, 0.0)
    dead_zone = np.abs(xs) <= t * lam
    prior = WeightedL1Prior([lam])
    worst = 0.0
    soft_gaps, identity_gaps = [], []
    for eps in (0.025, 0.1, 0.25, 0.5, 1.0):
        params = EstimatorParams(t=t, eps=eps)
        curve = np.empty_like(xs)
        for k, x in enumerate(xs):
            xv = np.array([x])
            curve[k] = u_pm_closed_l1(np.array([lam]), xv, params).u_pm[0]
            worst = max(worst, abs(
                curve[k] - posterior_summary_quadrature(prior, xv,
                                                        params).u_pm[0]))
        assert np.all(np.diff(curve) >= -1e-9)
        # every curve sits between the soft-threshold and identity maps
        lower = np.where(xs >= 0, soft, xs)
        upper = np.where(xs >= 0, xs, soft)
        assert np.all(curve >= lower - 1e-9)
        assert np.all(curve <= upper + 1e-9)
        soft_gaps.append(float(np.max(np.abs(curve - soft))))
        identity_gaps.append(float(np.max(np.abs(curve - xs)[dead_zone])))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-8, worst
    # shrinking eps approaches the soft threshold; growing eps approaches
    # the identity over the dead zone
    assert all(a < b for a, b in zip(soft_gaps, soft_gaps[1:]))
    assert all(a > b for a, b in zip(identity_gaps, identity_gaps[1:]))
    assert elapsed < 10.0, elapsed


def test_criterion_03_hj_residual_second_order():
    start = time.perf_counter()
    for idx, prior in enumerate((QuadraticPrior(1.0), WeightedL1Prior([2.0]))):
        result = check_hj_residual(prior, 50,
                                   np.random.default_rng([2026, 3, idx]))
        assert result.passed, result.details
        assert all(order >= 1.5 for order in result.observed)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, elapsed


def test_criterion_04_bound_suite_500_trials():
    start = time.perf_counter()
    for p_idx, prior in enumerate(BOUND_PRIORS):
        rng = np.random.default_rng([2026, 4, p_idx])
        for check in (check_mse_bound, check_map_pm_distance,
                      check_nonexpansive_monotone):
            result = check(prior, 500, rng)
            assert result.passed, (result.name, result.details)
        t_seq = np.geomspace(1.0, 1e-4, 9)
        for _ in range(500):
            d_seq = [rng.uniform(-1, 1, 2) for _ in t_seq]
            result = check_t_to_zero(prior, rng.uniform(-5, 5, 2), 0.5,
                                     t_seq, d_seq)
            assert result.passed, result.details
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, elapsed


def test_criterion_05_vanishing_smoothing_limit():
    start = time.perf_counter()
    xt_pairs = [(np.array([x]), t) for x in np.linspace(-5, 5, 101)
                for t in (0.25, 0.5, 1.0, 2.5, 5.0)]
    for prior in BOUND_PRIORS:
        result = check_eps_to_zero(prior, xt_pairs, (1.0, 0.3, 0.1, 0.03, 0.01))
        assert result.passed, (result.name, result.details)
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, elapsed


def test_criterion_06_moreau_decomposition_identity():
    start = time.perf_counter()
    for prior in (QuadraticPrior(1.0), WeightedL1Prior([2.0])):
        result = check_moreau_decomposition_1d(prior, np.linspace(-5, 5, 41),
                                               1.25, 0.5)
        assert result.passed, (result.name, result.details)
        worst_identity, worst_argmin_gap = result.observed
        assert worst_identity <= 1e-4
        assert worst_argmin_gap <= 1e-3 + 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, elapsed


def test_criterion_07_ball_posterior_mean_strictly_interior():
    start = time.perf_counter()
    result = check_topology(BallIndicatorPrior(1.0), 200,
                            np.random.default_rng([2026, 7]))
    assert result.passed, result.details
    worst_norm, worst_chain = result.observed
    assert worst_norm <= 1.0 - 1e-9
    assert worst_chain <= 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 20.0, elapsed


def test_criterion_08_bregman_risk_argmin_is_map():
    start = time.perf_counter()
    rng = np.random.default_rng([2026, 8])
    for prior in (QuadraticPrior(1.0), WeightedL1Prior([2.0])):
        for _ in range(20):
            x = float(rng.uniform(-8, 8))
            t = _loguniform(rng, 0.5, 5)
            eps = _loguniform(rng, 0.1, 5)
            u_map = float(prior.prox(np.array([x]), t)[0])
            grid = Grid1D(u_map - 2.0, u_map + 2.0, 4001)
            result = check_bregman_risk_1d(prior, x, t, eps, grid)
            assert result.passed, (result.name, result.details)
            assert result.observed <= grid.spacing + 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, elapsed


def test_criterion_09_two_pixel_sampler_matches_quadrature(
        two_pixel_first_run):
    results, sampler_elapsed = two_pixel_first_run
    start = time.perf_counter()
    quad_cfg = QuadratureConfig(nodes_per_dim=401, refine_tol=1e-5,
                                max_refine=3)
    for (x_pair, t, eps, lam), res in zip(_two_pixel_cases(), results):
        prior = AnisotropicTV2DPrior(lam=lam, width=2, height=1)
        summary, _ = posterior_expectations(
            prior, np.array(x_pair), EstimatorParams(t=t, eps=eps),
            [], quad_cfg)
        diff = np.abs(res.mean_image.pixels.ravel() - summary.u_pm)
        assert np.all(diff <= 3.0 * res.stderr_image.pixels.ravel()), \
            (x_pair, t, eps, lam, diff, res.stderr_image.pixels)
        assert res.rhat_max <= 1.05
    elapsed = sampler_elapsed + time.perf_counter() - start
    assert elapsed < 120.0, elapsed


def test_criterion_10_staircasing_map_only(staircase_first_run):
    _, pm, report, elapsed = staircase_first_run
    assert report["plateau_map"] > 5.0 * report["plateau_pm"], report
    assert pm.converged, report
    assert elapsed < 600.0, elapsed


def test_criterion_11_determinism_of_sampler_criteria(two_pixel_first_run,
                                                      staircase_first_run):
    first_small, _ = two_pixel_first_run
    second_small = _run_two_pixel_samplers()
    for a, b in zip(first_small, second_small):
        assert np.array_equal(a.mean_image.pixels, b.mean_image.pixels)
        assert np.array_equal(a.stderr_image.pixels, b.stderr_image.pixels)
        assert a.rhat_max == b.rhat_max

    map_a, pm_a, report_a, _ = staircase_first_run
    map_b, pm_b, report_b = _run_staircase_pipeline()
    assert np.array_equal(map_a.pixels, map_b.pixels)
    assert np.array_equal(pm_a.mean_image.pixels, pm_b.mean_image.pixels)
    assert np.array_equal(pm_a.var_image.pixels, pm_b.var_image.pixels)
    assert report_a == report_b
