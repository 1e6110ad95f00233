"""Numeric checks for the estimator theory, packaged as a report.

Each check turns one proved statement about the posterior-mean and MAP
estimators (a bound, a limit, a representation identity, or a
qualitative imaging claim) into a pass/fail measurement with explicit
tolerances.  Checks draw their own random trials from a seeded
generator, so a report is reproducible from its seed.

Default trial distributions: x uniform on [-10, 10]^n, t log-uniform on
[0.05, 50], eps log-uniform on [0.01, 50].  No check here ever invokes
an estimator above dimension 2; the expensive image-scale comparison
lives in ``check_staircasing`` and only runs in the imaging suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .envelope import Grid1D, envelope
from .errors import NumericalError, ValidationError
from .gibbs import SamplerConfig, posterior_mean_mcmc
from .imaging import Image, NoiseSpec, add_gaussian_noise, plateau_fraction, psnr, rof_map
from .posterior import (
    EstimatorParams,
    QuadratureConfig,
    mean_min_subgradient,
    posterior_expectations,
    posterior_summary,
    posterior_summary_quadrature,
    s_eps_value,
)
from .priors import (
    BallIndicatorPrior,
    DomainLocation,
    Prior,
    QuadraticPrior,
    WeightedL1Prior,
    ZeroPrior,
)

_INEQ_SLACK = 1e-9


@dataclass(frozen=True)
class CheckResult:
    """One measured statement: observed value(s) against a bound or
    target, with the tolerance that decided ``passed``."""

    name: str
    passed: bool
    observed: float | list
    bound_or_target: float | list
    tolerance: float
    details: str

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "observed": self.observed,
            "bound_or_target": self.bound_or_target,
            "tolerance": self.tolerance,
            "details": self.details,
        }


@dataclass(frozen=True)
class VerificationReport:
    checks: list = field(default_factory=list)
    seed: int = 0
    timestamp: str = ""

    def __post_init__(self):
        if not self.checks:
            raise ValidationError("a report needs at least one check")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must fit in 64 unsigned bits")

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "checks": [c.to_json() for c in self.checks],
            "seed": self.seed,
            "timestamp": self.timestamp,
        }


def _draw_t(rng) -> float:
    return float(np.exp(rng.uniform(math.log(0.05), math.log(50.0))))


def _draw_eps(rng) -> float:
    return float(np.exp(rng.uniform(math.log(0.01), math.log(50.0))))


_pm_summary = posterior_summary


def _closed_form_dim(prior: Prior) -> int:
    return 2 if isinstance(prior, (ZeroPrior, QuadraticPrior, WeightedL1Prior)) else 1


def _per_component_weights(prior: Prior, n: int):
    """A WeightedL1 prior matching the trial dimension."""
    if isinstance(prior, WeightedL1Prior) and prior.weights.size == 1 and n > 1:
        return WeightedL1Prior(np.full(n, prior.weights[0]))
    return prior


def check_mse_bound(prior: Prior, trials: int, rng) -> CheckResult:
    """MSE <= n t eps / (1 + m t), with equality for quadratic curvature."""
    n = _closed_form_dim(prior)
    work = _per_component_weights(prior, n)
    m = work.strong_convexity()
    exact = isinstance(work, (ZeroPrior, QuadraticPrior))
    worst_violation = -math.inf
    worst_gap = 0.0
    for _ in range(trials):
        x = rng.uniform(-10, 10, n)
        params = EstimatorParams(t=_draw_t(rng), eps=_draw_eps(rng))
        mse = _pm_summary(work, x, params).mse
        bound = n * params.t * params.eps / (1.0 + m * params.t)
        worst_violation = max(worst_violation, (mse - bound) / (1.0 + bound))
        if exact:
            worst_gap = max(worst_gap, abs(mse - bound) / (1.0 + bound))
    passed = worst_violation <= _INEQ_SLACK and worst_gap <= 1e-9
    return CheckResult(
        name=f"mse_bound[{prior.kind}]",
        passed=passed,
        observed=[worst_violation, worst_gap] if exact else worst_violation,
        bound_or_target=0.0,
        tolerance=_INEQ_SLACK,
        details=f"{trials} trials, n={n}, relative violation of "
                f"n*t*eps/(1+m*t); equality enforced: {exact}",
    )


def check_map_pm_distance(prior: Prior, trials: int, rng) -> CheckResult:
    """||u_MAP - u_PM||^2 <= n t eps / (1 + m t)."""
    n = _closed_form_dim(prior)
    work = _per_component_weights(prior, n)
    m = work.strong_convexity()
    worst = -math.inf
    for _ in range(trials):
        x = rng.uniform(-10, 10, n)
        params = EstimatorParams(t=_draw_t(rng), eps=_draw_eps(rng))
        u_pm = _pm_summary(work, x, params).u_pm
        u_map = work.prox(x, params.t)
        dist_sq = float(np.sum((u_map - u_pm) ** 2))
        bound = n * params.t * params.eps / (1.0 + m * params.t)
        worst = max(worst, (dist_sq - bound) / (1.0 + bound))
    return CheckResult(
        name=f"map_pm_distance[{prior.kind}]",
        passed=worst <= _INEQ_SLACK,
        observed=worst,
        bound_or_target=0.0,
        tolerance=_INEQ_SLACK,
        details=f"{trials} trials, n={n}, relative violation of the "
                "squared-distance bound",
    )


def check_nonexpansive_monotone(prior: Prior, trials: int, rng) -> CheckResult:
    """x -> u_PM(x) is monotone and 1-Lipschitz."""
    n = _closed_form_dim(prior)
    work = _per_component_weights(prior, n)
    min_inner = math.inf
    max_expansion = -math.inf
    for _ in range(trials):
        x = rng.uniform(-10, 10, n)
        d = rng.uniform(-10, 10, n)
        params = EstimatorParams(t=_draw_t(rng), eps=_draw_eps(rng))
        du = _pm_summary(work, x + d, params).u_pm - _pm_summary(work, x, params).u_pm
        min_inner = min(min_inner, float(du @ d))
        max_expansion = max(
            max_expansion,
            float(np.linalg.norm(du) - np.linalg.norm(d)),
        )
    passed = min_inner >= -_INEQ_SLACK and max_expansion <= _INEQ_SLACK
    return CheckResult(
        name=f"nonexpansive_monotone[{prior.kind}]",
        passed=passed,
        observed=[min_inner, max_expansion],
        bound_or_target=[0.0, 0.0],
        tolerance=_INEQ_SLACK,
        details=f"{trials} trials, n={n}; min <du, d> and max ||du||-||d||",
    )


def check_t_to_zero(prior: Prior, x_in_dom, eps: float, t_seq,
                    d_seq) -> CheckResult:
    """u_PM(x + t_k d_k, t_k, eps) -> x as t_k -> 0."""
    x = np.atleast_1d(np.asarray(x_in_dom, dtype=np.float64))
    t_seq = [float(t) for t in t_seq]
    d_seq = [np.atleast_1d(np.asarray(d, dtype=np.float64)) for d in d_seq]
    if len(t_seq) != len(d_seq) or not t_seq:
        raise ValidationError("t_seq and d_seq must be equal-length, non-empty")
    if any(t <= 0 for t in t_seq) or any(
            b >= a for a, b in zip(t_seq, t_seq[1:])):
        raise ValidationError("t_seq must be positive and strictly decreasing")
    n = x.size
    work = _per_component_weights(prior, n)
    m = work.strong_convexity()
    worst_envelope = -math.inf
    dist = math.nan
    for t_k, d_k in zip(t_seq, d_seq):
        shifted = x + t_k * d_k
        u = _pm_summary(work, shifted, EstimatorParams(t=t_k, eps=eps)).u_pm
        dist = float(np.linalg.norm(u - x))
        # triangle envelope: step size, plus the MAP displacement at the
        # shifted point, plus the PM-to-MAP distance bound
        map_shift = float(np.linalg.norm(shifted - work.prox(shifted, t_k)))
        env = (float(np.linalg.norm(t_k * d_k)) + map_shift
               + math.sqrt(n * t_k * eps / (1.0 + m * t_k)))
        worst_envelope = max(worst_envelope, (dist - env) / (1.0 + env))
    final_target = 10.0 * math.sqrt(n * t_seq[-1] * eps)
    passed = worst_envelope <= _INEQ_SLACK and dist < final_target
    return CheckResult(
        name=f"t_to_zero[{prior.kind}]",
        passed=passed,
        observed=[worst_envelope, dist],
        bound_or_target=[0.0, final_target],
        tolerance=_INEQ_SLACK,
        details=f"{len(t_seq)} steps down to t={t_seq[-1]:g}, eps={eps:g}; "
                "distance stays inside the triangle-inequality envelope",
    )


def check_eps_to_zero(prior: Prior, xt_pairs, eps_seq) -> CheckResult:
    """S_eps -> S_0 and u_PM -> u_MAP as eps decreases, monotonically in
    the sup over the (x, t) grid, with the final u-gap <= sqrt(n t eps)."""
    eps_seq = [float(e) for e in eps_seq]
    if not eps_seq or any(e <= 0 for e in eps_seq) or any(
            b >= a for a, b in zip(eps_seq, eps_seq[1:])):
        raise ValidationError("eps_seq must be positive, strictly decreasing")
    pairs = [(np.atleast_1d(np.asarray(x, dtype=np.float64)), float(t))
             for x, t in xt_pairs]
    if not pairs:
        raise ValidationError("need at least one (x, t) pair")
    baselines = [envelope(prior, x, t) for x, t in pairs]
    sup_s_gaps = []
    sup_u_gaps = []
    final_pointwise_ok = True
    for k, eps in enumerate(eps_seq):
        s_gap = 0.0
        u_gap = 0.0
        for (x, t), base in zip(pairs, baselines):
            summary = _pm_summary(prior, x, EstimatorParams(t=t, eps=eps))
            s_gap = max(s_gap, abs(summary.s_eps - base.value))
            gap = float(np.linalg.norm(summary.u_pm - base.minimizer))
            u_gap = max(u_gap, gap)
            if k == len(eps_seq) - 1:
                if gap > math.sqrt(x.size * t * eps) + _INEQ_SLACK:
                    final_pointwise_ok = False
        sup_s_gaps.append(s_gap)
        sup_u_gaps.append(u_gap)
    monotone = all(
        b <= a + _INEQ_SLACK
        for seq in (sup_s_gaps, sup_u_gaps)
        for a, b in zip(seq, seq[1:])
    )
    passed = monotone and final_pointwise_ok
    return CheckResult(
        name=f"eps_to_zero[{prior.kind}]",
        passed=passed,
        observed=[sup_s_gaps[-1], sup_u_gaps[-1]],
        bound_or_target=[sup_s_gaps[0], sup_u_gaps[0]],
        tolerance=_INEQ_SLACK,
        details=f"{len(pairs)} grid points, eps {eps_seq[0]:g} down to "
                f"{eps_seq[-1]:g}; sup gaps non-increasing: {monotone}",
    )


def check_topology(prior: Prior, trials: int, rng) -> CheckResult:
    """For the ball indicator the posterior mean is strictly interior and
    0 = J(u_PM) <= E[J] <= eps(exp(S_eps/eps) - 1)."""
    if not isinstance(prior, BallIndicatorPrior):
        raise ValidationError("check_topology expects a BallIndicator prior")
    r = prior.radius
    worst_norm = 0.0
    worst_chain = -math.inf
    all_interior = True
    for trial in range(trials):
        n = 1 + trial % 2
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        x = direction * rng.uniform(0.0, 50.0)
        params = EstimatorParams(t=_draw_t(rng), eps=_draw_eps(rng))
        summary, extras = posterior_expectations(
            prior, x, params, [prior.eval_batch])
        u = summary.u_pm
        if prior.domain_contains(u) is not DomainLocation.INTERIOR:
            all_interior = False
        worst_norm = max(worst_norm, float(np.linalg.norm(u)) / r)
        mean_j = float(extras[0])
        ratio = summary.s_eps / params.eps
        upper = math.inf if ratio > 700 else params.eps * math.expm1(ratio)
        chain_violation = max(float(prior.eval(u)) - mean_j,
                              mean_j - upper)
        worst_chain = max(worst_chain, chain_violation)
    passed = (all_interior and worst_norm <= 1.0 - 1e-9
              and worst_chain <= _INEQ_SLACK)
    return CheckResult(
        name=f"topology[{prior.kind}]",
        passed=passed,
        observed=[worst_norm, worst_chain],
        bound_or_target=[1.0 - 1e-9, 0.0],
        tolerance=_INEQ_SLACK,
        details=f"{trials} trials (dims 1-2), ||x|| up to 50; "
                f"all means interior: {all_interior}",
    )


def check_representation(prior: Prior, trials: int, rng) -> CheckResult:
    """grad_x S_eps equals the mean minimal subgradient, and the MSE
    identity n t eps - t E<pi_dJ(0), y - u_PM> matches the direct MSE."""
    worst_grad = 0.0
    worst_mse = 0.0
    for _ in range(trials):
        x = rng.uniform(-10, 10, 1)
        params = EstimatorParams(t=_draw_t(rng), eps=_draw_eps(rng))
        msg = mean_min_subgradient(prior, x, params)

        def g_times_y(pts):
            return prior.min_subgradient_batch(pts)[:, 0] * pts[:, 0]

        summary, extras = posterior_expectations(prior, x, params, [g_times_y])
        h = 1e-5 * max(1.0, abs(float(x[0])))
        fd = (s_eps_value(prior, x + h, params)
              - s_eps_value(prior, x - h, params)) / (2.0 * h)
        worst_grad = max(worst_grad,
                         abs(fd - float(msg[0])) / (1.0 + abs(float(msg[0]))))
        inner = float(extras[0]) - float(msg[0]) * float(summary.u_pm[0])
        identity = params.t * params.eps - params.t * inner
        worst_mse = max(worst_mse,
                        abs(identity - summary.mse) / (1.0 + summary.mse))
    passed = worst_grad <= 1e-6 and worst_mse <= 1e-6
    return CheckResult(
        name=f"representation[{prior.kind}]",
        passed=passed,
        observed=[worst_grad, worst_mse],
        bound_or_target=[0.0, 0.0],
        tolerance=1e-6,
        details=f"{trials} trials, n=1; finite-difference gradient vs "
                "quadrature subgradient mean, and the variance identity",
    )


def check_monotonicity_inequality(prior: Prior, trials: int, rng) -> CheckResult:
    """((1+mt)/t) E||y - y0||^2 <= n eps - <(y0-x)/t + pi_dJ(y0)(0),
    u_PM - y0> for every y0 in dom dJ."""
    m = prior.strong_convexity()
    worst = -math.inf
    for trial in range(trials):
        x = rng.uniform(-10, 10, 1)
        params = EstimatorParams(t=_draw_t(rng), eps=_draw_eps(rng))
        summary = _pm_summary(prior, x, params)
        candidates = [np.array([rng.uniform(-10, 10)])]
        if trial == 0:
            candidates.append(summary.u_pm.copy())
        for y0 in candidates:
            g0 = prior.min_subgradient(y0)
            mean_sq = summary.mse + float(np.sum((summary.u_pm - y0) ** 2))
            lhs = (1.0 + m * params.t) / params.t * mean_sq
            rhs = params.eps - float(
                ((y0 - x) / params.t + g0) @ (summary.u_pm - y0))
            worst = max(worst, (lhs - rhs) / (1.0 + abs(rhs)))
    return CheckResult(
        name=f"monotonicity_inequality[{prior.kind}]",
        passed=worst <= _INEQ_SLACK,
        observed=worst,
        bound_or_target=0.0,
        tolerance=_INEQ_SLACK,
        details=f"{trials} trials, n=1, random y0 plus y0=u_PM; relative "
                "violation of the inequality",
    )


def check_bregman_risk_1d(prior: Prior, x: float, t: float, eps: float,
                          grid: Grid1D) -> CheckResult:
    """The grid argmin of u -> E[Phi(u) - Phi(y) - phi(y)(u - y)], with
    Phi(v) = v^2/2 + tJ(v) and phi(y) = y + t pi_dJ(y)(0), sits within
    one cell of u_MAP."""
    params = EstimatorParams(t=t, eps=eps)
    xv = np.array([float(x)])

    def phi(pts):
        return (pts + t * prior.min_subgradient_batch(pts))[:, 0]

    def big_phi(pts):
        return 0.5 * pts[:, 0] ** 2 + t * prior.eval_batch(pts)

    def phi_times_y(pts):
        return phi(pts) * pts[:, 0]

    _, extras = posterior_expectations(prior, xv, params,
                                       [phi, big_phi, phi_times_y])
    e_phi, e_big_phi, e_phi_y = (float(v) for v in extras)
    u = grid.values
    risk = (0.5 * u * u + t * prior.eval_batch(u[:, None])
            - e_phi * u + (e_phi_y - e_big_phi))
    idx = int(np.argmin(risk))
    if idx == 0 or idx == u.size - 1:
        raise NumericalError("Bregman risk argmin on a grid endpoint; widen the grid")
    u_map = float(prior.prox(xv, t)[0])
    gap = abs(u[idx] - u_map)
    passed = gap <= grid.spacing + 1e-12 and bool(np.all(risk >= -1e-9))
    return CheckResult(
        name=f"bregman_risk[{prior.kind}]",
        passed=passed,
        observed=gap,
        bound_or_target=grid.spacing,
        tolerance=1e-12,
        details=f"x={x:g}, t={t:g}, eps={eps:g}; grid argmin vs prox, "
                f"risk minimum {float(risk[idx]):.3e}",
    )


def _conjugate_on_grid(z_vals: np.ndarray, k_vals: np.ndarray,
                       y_vals: np.ndarray):
    """Discrete Legendre transform max_z (z y - K(z)) for convex K.

    Uses the slope characterization: the argmax index is the number of
    forward slopes of K at most y, which matches the brute-force grid
    maximum exactly and costs O(len(z) + len(y) log len(z)).
    """
    slopes = np.diff(k_vals) / np.diff(z_vals)
    slopes = np.maximum.accumulate(slopes)
    idx = np.searchsorted(slopes, y_vals, side="right")
    if np.any(idx == 0) or np.any(idx == z_vals.size - 1):
        raise NumericalError(
            "discrete conjugate attained on a grid endpoint; widen the z-grid"
        )
    return z_vals[idx] * y_vals - k_vals[idx], idx


def check_moreau_decomposition_1d(prior: Prior, x_grid, t: float,
                                  eps: float) -> CheckResult:
    """t S_eps(x) = min_y { (x-y)^2/2 + K*(y) - y^2/2 } with K* the
    conjugate of K_eps = x^2/2 - t S_eps; the grid argmin lands within
    one cell of u_PM and K*(y) - y^2/2 is discretely convex."""
    from .posterior import k_eps_grid

    params = EstimatorParams(t=t, eps=eps)
    xs = np.sort(np.asarray(x_grid, dtype=np.float64))
    if xs.size < 2:
        raise ValidationError("x_grid needs at least two points")
    m = prior.strong_convexity()
    lam_hat = (float(np.max(prior.weights))
               if isinstance(prior, WeightedL1Prior) else 0.0)
    h_y = 1e-3
    pad = 2.0 + 4.0 * math.sqrt(t * eps)
    y_lo, y_hi = xs[0] - pad, xs[-1] + pad
    y_vals = np.arange(y_lo, y_hi + h_y, h_y)
    z_span = (1.0 + m * t) * (max(abs(y_lo), abs(y_hi)) + 1.0) + t * lam_hat
    h_z = h_y / 100.0
    z_vals = np.arange(-z_span, z_span + h_z, h_z)
    k_vals = k_eps_grid(prior, z_vals, params)
    k_star, _ = _conjugate_on_grid(z_vals, k_vals, y_vals)
    initial_data = k_star - 0.5 * y_vals**2
    second_diff = np.diff(initial_data, 2)
    convex_ok = bool(np.all(second_diff >= -1e-9))
    worst_identity = 0.0
    worst_argmin_gap = 0.0
    for x in xs:
        objective = 0.5 * (x - y_vals) ** 2 + initial_data
        idx = int(np.argmin(objective))
        if idx == 0 or idx == y_vals.size - 1:
            raise NumericalError("decomposition argmin on a grid endpoint")
        summary = _pm_summary(prior, np.array([x]), params)
        lhs = t * summary.s_eps
        worst_identity = max(worst_identity,
                             abs(lhs - float(objective[idx])) / (1.0 + abs(lhs)))
        worst_argmin_gap = max(worst_argmin_gap,
                               abs(float(y_vals[idx]) - float(summary.u_pm[0])))
    passed = (worst_identity <= 1e-4 and worst_argmin_gap <= h_y + 1e-12
              and convex_ok)
    return CheckResult(
        name=f"moreau_decomposition[{prior.kind}]",
        passed=passed,
        observed=[worst_identity, worst_argmin_gap],
        bound_or_target=[1e-4, h_y],
        tolerance=1e-4,
        details=f"{xs.size} x-points, t={t:g}, eps={eps:g}; discrete "
                f"convexity of the transformed initial data: {convex_ok}",
    )


def check_hj_residual(prior: Prior, trials: int, rng) -> CheckResult:
    """Centered-difference residual of d_t S + |grad S|^2/2 - (eps/2)
    Lap S shrinks with observed order >= 1.5 as the step halves."""
    steps = (1e-2, 5e-3, 2.5e-3)
    eps = 1.0
    cfg = QuadratureConfig(nodes_per_dim=2001, refine_tol=1e-12, max_refine=6)

    def s_val(x, t):
        return posterior_summary_quadrature(
            prior, np.array([x]), EstimatorParams(t=t, eps=eps), cfg).s_eps

    residuals = {h: [] for h in steps}
    for _ in range(trials):
        x = float(rng.uniform(-10, 10))
        t = float(rng.uniform(0.5, 5.0))
        for h in steps:
            st = (s_val(x, t + h) - s_val(x, t - h)) / (2.0 * h)
            sp, s0, sm = s_val(x + h, t), s_val(x, t), s_val(x - h, t)
            sx = (sp - sm) / (2.0 * h)
            sxx = (sp - 2.0 * s0 + sm) / (h * h)
            residuals[h].append(st + 0.5 * sx * sx - 0.5 * eps * sxx)
    rms = [float(np.sqrt(np.mean(np.square(residuals[h])))) for h in steps]
    orders = [math.log2(rms[i] / rms[i + 1]) for i in range(len(steps) - 1)]
    passed = all(o >= 1.5 for o in orders)
    return CheckResult(
        name=f"hj_residual[{prior.kind}]",
        passed=passed,
        observed=orders,
        bound_or_target=[1.5, 1.5],
        tolerance=0.0,
        details=f"{trials} samples, eps=1, steps {steps}; RMS residuals "
                + ", ".join(f"{r:.3e}" for r in rms),
    )


def check_staircasing(clean: Image, sigma: float, t: float, eps: float,
                      lam: float, sampler_cfg: SamplerConfig) -> CheckResult:
    """The MAP output develops flat regions; the posterior-mean output
    does not: plateau_fraction(MAP) > 5 x plateau_fraction(PM)."""
    if sigma < 0:
        raise ValidationError("sigma must be nonnegative")
    if sigma == 0 or lam == 0:
        return CheckResult(
            name="staircasing",
            passed=True,
            observed=[],
            bound_or_target=5.0,
            tolerance=0.0,
            details="skipped (degenerate: noiseless or unregularized setting)",
        )
    noisy = add_gaussian_noise(clean, NoiseSpec(sigma=sigma,
                                                seed=sampler_cfg.seed))
    map_img = rof_map(noisy, t, lam)
    pm_res = posterior_mean_mcmc(noisy, t, eps, lam, sampler_cfg)
    f_map = plateau_fraction(map_img, 1e-6)
    f_pm = plateau_fraction(pm_res.mean_image, 1e-6)
    passed = f_map > 5.0 * f_pm and pm_res.converged
    details = (
        f"sigma={sigma:g}, t={t:g}, eps={eps:g}, lambda={lam:g}, "
        f"sweeps={sampler_cfg.sweeps}, chains={sampler_cfg.chains}; "
        f"rhat_max={pm_res.rhat_max:.4f}; PSNR noisy/MAP/PM vs clean: "
        f"{psnr(clean, noisy):.2f}/{psnr(clean, map_img):.2f}/"
        f"{psnr(clean, pm_res.mean_image):.2f} dB"
    )
    return CheckResult(
        name="staircasing",
        passed=passed,
        observed=[f_map, f_pm],
        bound_or_target=5.0,
        tolerance=0.0,
        details=details,
    )


# ---------------------------------------------------------------------------
# suite assembly
# ---------------------------------------------------------------------------

SUITE_NAMES = ("core", "bounds", "pde", "imaging")


def _bound_suite_priors():
    return (ZeroPrior(), QuadraticPrior(1.0), WeightedL1Prior([2.0]))


def _synthetic_scene(size: int = 64) -> Image:
    """Deterministic piecewise-constant test image with two shapes."""
    pix = np.full((size, size), 60.0)
    pix[size // 5: size * 3 // 5, size // 8: size // 2] = 160.0
    yy, xx = np.mgrid[0:size, 0:size]
    disk = (yy - 0.7 * size) ** 2 + (xx - 0.7 * size) ** 2 <= (0.18 * size) ** 2
    pix[disk] = 220.0
    return Image.from_array(pix)


def _suite_checks(suite: str, seed: int,
                  staircasing_cfg: SamplerConfig | None):
    """Yield (callable, kwargs) pairs; each receives its own generator."""
    jobs = []
    if suite in ("bounds", "default"):
        for prior in _bound_suite_priors():
            jobs.append(lambda rng, p=prior: check_mse_bound(p, 200, rng))
            jobs.append(lambda rng, p=prior: check_map_pm_distance(p, 200, rng))
            jobs.append(
                lambda rng, p=prior: check_nonexpansive_monotone(p, 200, rng))

            def t_limit(rng, p=prior):
                t_seq = np.geomspace(1.0, 1e-4, 9)
                d_seq = [rng.uniform(-1, 1, 2) for _ in t_seq]
                return check_t_to_zero(p, rng.uniform(-5, 5, 2), 0.5,
                                       t_seq, d_seq)

            jobs.append(t_limit)
    if suite in ("core", "default"):
        quad = QuadraticPrior(1.0)
        l1 = WeightedL1Prior([2.0])
        jobs.append(lambda rng: check_representation(quad, 20, rng))
        jobs.append(lambda rng: check_representation(l1, 20, rng))
        jobs.append(lambda rng: check_monotonicity_inequality(quad, 40, rng))
        jobs.append(lambda rng: check_monotonicity_inequality(l1, 40, rng))
        jobs.append(lambda rng: check_topology(BallIndicatorPrior(1.0), 60, rng))
        jobs.append(lambda rng: check_bregman_risk_1d(
            quad, 3.0, 1.0, 1.0, Grid1D(-1.0, 4.0, 5001)))
        jobs.append(lambda rng: check_bregman_risk_1d(
            l1, 5.0, 1.25, 0.5, Grid1D(-1.0, 6.0, 7001)))
        jobs.append(lambda rng: check_moreau_decomposition_1d(
            quad, np.linspace(-5, 5, 41), 1.25, 0.5))
        jobs.append(lambda rng: check_moreau_decomposition_1d(
            l1, np.linspace(-5, 5, 41), 1.25, 0.5))
    if suite in ("pde", "default"):
        for prior in (QuadraticPrior(1.0), WeightedL1Prior([2.0])):
            jobs.append(lambda rng, p=prior: check_hj_residual(p, 10, rng))
        xt = [(np.array([x]), t) for x in np.linspace(-5, 5, 11)
              for t in (0.5, 1.0, 2.5)]
        for prior in _bound_suite_priors():
            jobs.append(lambda rng, p=prior: check_eps_to_zero(
                p, xt, (1.0, 0.3, 0.1, 0.03, 0.01)))
    if suite == "imaging":
        cfg = staircasing_cfg or SamplerConfig(
            sweeps=2000, burn_in=400, seed=seed, chains=2)
        jobs.append(lambda rng: check_staircasing(
            _synthetic_scene(), 20.0, 20.0, 20.0, 1.0, cfg))
    return jobs


def run_suite(suite: str = "default", seed: int = 0,
              staircasing_cfg: SamplerConfig | None = None) -> VerificationReport:
    """Run one named suite (or the default core+bounds+pde union)."""
    if suite not in SUITE_NAMES + ("default",):
        raise ValidationError(
            f"unknown suite {suite!r}; expected one of "
            f"{', '.join(SUITE_NAMES)} or default"
        )
    jobs = _suite_checks(suite, seed, staircasing_cfg)
    checks = []
    for idx, job in enumerate(jobs):
        rng = np.random.default_rng([seed, idx])
        checks.append(job(rng))
    return VerificationReport(
        checks=checks,
        seed=seed,
        timestamp=datetime.now(timezone.utc).isoformat(),
    )
