"""Posterior summaries via the viscous Hamilton-Jacobi / heat representation.

For a convex prior J, noise level eps > 0, and smoothing scale t > 0, the
posterior density over clean signals y given data x is proportional to
exp(-(||x - y||^2/(2t) + J(y))/eps).  This module computes

  * w_eps: the normalized partition function, in (0, 1],
  * S_eps = -eps ln w_eps: the smooth solution of the viscous HJ equation
    dS/dt + ||grad S||^2/2 = (eps/2) Lap S with initial data J,
  * u_pm = x - t grad S_eps: the posterior mean,
  * mse = E||y - u_pm||^2 = n t eps - t^2 eps Lap S_eps,

by adaptive tensor-product Gauss-Legendre quadrature in dimensions 1-3,
and by closed forms for the quadratic and weighted-l1 priors.  It also
provides the convex potential K_eps = ||x||^2/2 - t S_eps, its discrete
conjugate, posterior means through Moreau-smoothed priors, and the mean
minimal subgradient.

All exponent accumulation is done in log-space with max shifting; the
integration window is centered at the proximal point prox_{tJ}(x), where
the posterior mass actually sits, with half-width
window * sqrt(t eps / (1 + m t)) per coordinate (m the strong convexity
modulus), which keeps the neglected relative mass below exp(-window^2/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, log_ndtr, roots_legendre

from .errors import NumericalError, ValidationError
from .priors import (
    BallIndicatorPrior,
    Prior,
    QuadraticPrior,
    WeightedL1Prior,
    ZeroPrior,
)

_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = roots_legendre(_GL_ORDER)
_MAX_GRID_POINTS = 20_000_000


def _check_grid_size(total: int):
    if total > _MAX_GRID_POINTS:
        raise NumericalError(
            "quadrature refinement would exceed the grid-size limit; "
            "loosen refine_tol or reduce nodes_per_dim"
        )


@dataclass(frozen=True)
class EstimatorParams:
    """Smoothing scale t > 0 and noise level eps >= 0.

    eps = 0 is a routing sentinel: it selects the MAP (first-order) path
    and is rejected by every posterior-mean computation here.
    """

    t: float
    eps: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t > 0):
            raise ValidationError("t must be a positive finite real")
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise ValidationError("eps must be a nonnegative finite real")


@dataclass(frozen=True)
class QuadratureConfig:
    """Controls for the posterior quadrature.

    nodes_per_dim is a per-axis budget; the default suits 1D problems.
    In two or three dimensions pass a smaller budget (for example 201 or
    51), since refinement doubles every axis and the total node count is
    capped.
    """

    window: float = 12.0
    nodes_per_dim: int = 2001
    refine_tol: float = 1e-10
    max_refine: int = 6

    def __post_init__(self):
        if self.window < 6:
            raise ValidationError("window must be at least 6")
        if self.nodes_per_dim < 51 or self.nodes_per_dim % 2 == 0:
            raise ValidationError("nodes_per_dim must be odd and at least 51")
        if self.refine_tol <= 0:
            raise ValidationError("refine_tol must be positive")
        if self.max_refine < 0:
            raise ValidationError("max_refine must be nonnegative")


@dataclass(frozen=True)
class PosteriorSummary:
    """All posterior summary quantities at one (x, t, eps)."""

    w_eps: float
    s_eps: float
    u_pm: np.ndarray
    mse: float
    grad_s_eps: np.ndarray
    laplacian_s_eps: float


def _require_pm_params(params: EstimatorParams):
    if params.eps == 0:
        raise ValidationError(
            "eps = 0 selects the MAP path; use the envelope module"
        )


def _as_vector(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1:
        raise ValidationError("expected a 1D vector")
    if not np.all(np.isfinite(x)):
        raise ValidationError("x must be finite")
    return x


# ---------------------------------------------------------------------------
# log L and friends for the smooth soft-threshold closed form
# ---------------------------------------------------------------------------


def _log_l(z: np.ndarray) -> np.ndarray:
    """ln L(z) with L(z) = (1/2) e^{z^2} erfc(z), stable on all of R.

    For z >= 0, L = erfcx(z)/2 directly.  For z < 0 the z^2 growth is
    kept exactly and the remaining factor uses the normal log-CDF:
    (1/2) erfc(z) equals the standard normal CDF at -sqrt(2) z.
    """
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = np.log(0.5 * erfcx(z[pos]))
    zn = z[~pos]
    out[~pos] = zn * zn + log_ndtr(-math.sqrt(2.0) * zn)
    return out


def _log_l_prime_over_l(z: np.ndarray, logl: np.ndarray) -> np.ndarray:
    """d/dz ln L(z) = 2z - e^{-ln L} / sqrt(pi); always negative."""
    return 2.0 * z - np.exp(-logl) / math.sqrt(math.pi)


def _sech2(a: np.ndarray) -> np.ndarray:
    """sech^2 without overflow for large |a|."""
    e = np.exp(-2.0 * np.abs(a))
    return 4.0 * e / (1.0 + e) ** 2


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def s_eps_closed_quadratic(m: float, x, params: EstimatorParams) -> PosteriorSummary:
    """Exact posterior summary for the quadratic prior (m = 0 acts as the
    zero prior)."""
    _require_pm_params(params)
    if m < 0 or not math.isfinite(m):
        raise ValidationError("m must be a nonnegative finite real")
    x = _as_vector(x)
    t, eps = params.t, params.eps
    n = x.size
    shrink = 1.0 + m * t
    s = m * float(x @ x) / (2.0 * shrink) + 0.5 * n * eps * math.log(shrink)
    u = x / shrink
    mse = n * t * eps / shrink
    grad = (x - u) / t
    lap = n / t - mse / (t * t * eps)
    return PosteriorSummary(
        w_eps=min(math.exp(-s / eps), 1.0),
        s_eps=s,
        u_pm=u,
        mse=mse,
        grad_s_eps=grad,
        laplacian_s_eps=lap,
    )


def u_pm_closed_l1(weights, x, params: EstimatorParams) -> PosteriorSummary:
    """Exact posterior summary for the weighted-l1 prior.

    Componentwise, with L as in ``_log_l`` and z_pm = (+-x_i + t w_i) /
    sqrt(2 t eps):

        S_eps  = ||x||^2/(2t) - eps sum_i ln(L(z_+) + L(z_-))
        u_i    = x_i + t w_i tanh((ln L(z_+) - ln L(z_-)) / 2)

    The tanh form is the derivative-consistent orientation of the ratio
    (L_+ - L_-)/(L_+ + L_-); the inverted ratio sometimes quoted for this
    estimator is singular at x_i = 0 and contradicts the symmetry
    u(0) = 0, so it is not used.  Per-coordinate posterior variances come
    from  var_i = t eps du_i/dx_i, evaluated with the same log-domain
    quantities, which keeps every output finite for |x_i| up to 1e6 and
    far beyond.
    """
    _require_pm_params(params)
    x = _as_vector(x)
    w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
    if w.size != x.size:
        raise ValidationError("weights and x must have the same dimension")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be positive finite reals")
    t, eps = params.t, params.eps
    n = x.size
    scale = math.sqrt(2.0 * t * eps)
    zp = (x + t * w) / scale
    zm = (-x + t * w) / scale
    lp = _log_l(zp)
    lm = _log_l(zm)
    d = lp - lm
    u = x + t * w * np.tanh(0.5 * d)
    s = float(x @ x) / (2.0 * t) - eps * float(np.sum(np.logaddexp(lp, lm)))
    dd_dx = (_log_l_prime_over_l(zp, lp) + _log_l_prime_over_l(zm, lm)) / scale
    du_dx = 1.0 + 0.5 * t * w * _sech2(0.5 * d) * dd_dx
    var = t * eps * du_dx
    mse = float(np.sum(var))
    grad = (x - u) / t
    lap = n / t - mse / (t * t * eps)
    return PosteriorSummary(
        w_eps=min(math.exp(-s / eps), 1.0),
        s_eps=s,
        u_pm=u,
        mse=mse,
        grad_s_eps=grad,
        laplacian_s_eps=lap,
    )


# ---------------------------------------------------------------------------
# quadrature engine
# ---------------------------------------------------------------------------


def _panel_nodes(lo: float, hi: float, panels: int):
    """Composite Gauss-Legendre nodes and log-weights on [lo, hi]."""
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, np.log(weights)


def _boundary_layer_depth(a: float, t: float, eps: float, window: float) -> float:
    """Depth d into the ball past which the Gaussian exponent centered a
    distance a outside the boundary has dropped by window^2/2; reduces to
    window*sqrt(t eps) at a = 0 and to the exponential boundary-layer
    width window^2 t eps / (2a) when a dominates."""
    w2te = (window * window) * t * eps
    return -a + math.sqrt(a * a + w2te)


def _axis_nodes(lo: float, hi: float, kinks, budget: int):
    """Piecewise-composite GL nodes on [lo, hi], split at interior kinks."""
    cuts = [lo] + sorted(k for k in kinks if lo < k < hi) + [hi]
    total = hi - lo
    panels_total = max(budget // _GL_ORDER, 2)
    all_nodes, all_logw = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        panels = max(1, int(math.ceil(panels_total * (b - a) / total)))
        nodes, logw = _panel_nodes(a, b, panels)
        all_nodes.append(nodes)
        all_logw.append(logw)
    return np.concatenate(all_nodes), np.concatenate(all_logw)


def _tensor_grid(prior: Prior, x: np.ndarray, t: float, eps: float,
                 cfg: QuadratureConfig, level: int):
    """Tensor-product nodes (N, n) and their log-weights for full-space
    priors (and the 1D ball, which clips its interval exactly)."""
    n = x.size
    center = prior.prox(x, t)
    m = prior.strong_convexity()
    half = cfg.window * math.sqrt(t * eps / (1.0 + m * t))
    budget = cfg.nodes_per_dim * (2 ** level)
    axes = []
    for i in range(n):
        lo, hi = center[i] - half, center[i] + half
        if isinstance(prior, BallIndicatorPrior):
            r = prior.radius
            a = abs(x[i]) - r
            if a > 0:
                # mass lives in an exponential layer at the near boundary
                depth = _boundary_layer_depth(a, t, eps, cfg.window)
                lo, hi = (r - depth, r) if x[i] > 0 else (-r, -r + depth)
            lo = max(lo, -r)
            hi = min(hi, r)
        axes.append(_axis_nodes(lo, hi, prior.kinks(i), budget))
    _check_grid_size(math.prod(a[0].size for a in axes))
    if n == 1:
        points = axes[0][0][:, None]
        logw = axes[0][1]
    else:
        grids = np.meshgrid(*(a[0] for a in axes), indexing="ij")
        points = np.stack([g.ravel() for g in grids], axis=1)
        wgrids = np.meshgrid(*(a[1] for a in axes), indexing="ij")
        logw = sum(w.ravel() for w in wgrids)
    return points, logw


def _polar_grid(prior: BallIndicatorPrior, x: np.ndarray, t: float,
                eps: float, cfg: QuadratureConfig, level: int):
    """Exact-boundary nodes for the 2D ball via polar coordinates.

    The problem is rotated so that x lies on the positive first axis;
    the returned points are in the original frame.  The angular window
    shrinks with the von Mises concentration ||x|| rho / (t eps) so that
    sharply localized posteriors stay cheap.
    """
    r = prior.radius
    sigma = math.sqrt(t * eps)
    xnorm = float(np.linalg.norm(x))
    half = cfg.window * sigma
    if xnorm > r:
        # boundary layer: radial scale shrinks as x recedes from the ball
        depth = _boundary_layer_depth(xnorm - r, t, eps, cfg.window)
        rho_lo, rho_hi = max(0.0, r - depth), r
        rho_scale = depth / cfg.window
    else:
        rho_lo = max(0.0, xnorm - half)
        rho_hi = min(r, xnorm + half)
        rho_scale = min(sigma, r)
    refine = 2 ** level
    rho_panels = max(6, int(math.ceil((rho_hi - rho_lo) / (0.75 * rho_scale)))) * refine
    rho, rho_logw = _panel_nodes(rho_lo, rho_hi, rho_panels)

    rho_peak = min(max(xnorm, rho_lo), rho_hi)
    kappa = xnorm * rho_peak / (t * eps)
    if kappa > 1.0:
        dtheta = min(math.pi, 1.5 * cfg.window / math.sqrt(kappa))
        ang_scale = 1.0 / math.sqrt(kappa)
    else:
        dtheta = math.pi
        ang_scale = math.pi / 4.0
    theta_panels = max(6, int(math.ceil(dtheta / ang_scale))) * refine
    _check_grid_size(rho_panels * theta_panels * _GL_ORDER * _GL_ORDER)
    theta, theta_logw = _panel_nodes(-dtheta, dtheta, theta_panels)

    # rotation taking (1, 0) to the direction of x
    if xnorm > 0:
        c, s = x[0] / xnorm, x[1] / xnorm
    else:
        c, s = 1.0, 0.0
    rr, tt_ = np.meshgrid(rho, theta, indexing="ij")
    y1 = rr * np.cos(tt_)
    y2 = rr * np.sin(tt_)
    points = np.stack(
        [c * y1.ravel() - s * y2.ravel(), s * y1.ravel() + c * y2.ravel()],
        axis=1,
    )
    logw = (
        (rho_logw + np.log(rho))[:, None] + theta_logw[None, :]
    ).ravel()
    return points, logw


def _quadrature_pass(prior: Prior, x: np.ndarray, t: float, eps: float,
                     cfg: QuadratureConfig, level: int, extra_fns):
    if isinstance(prior, BallIndicatorPrior) and x.size == 2:
        points, logw = _polar_grid(prior, x, t, eps, cfg, level)
    else:
        points, logw = _tensor_grid(prior, x, t, eps, cfg, level)
    diff = points - x[None, :]
    phi = np.einsum("ij,ij->i", diff, diff) / (2.0 * t) + prior.eval_batch(points)
    loge = np.where(np.isfinite(phi), -phi / eps + logw, -np.inf)
    shift = float(np.max(loge))
    if not math.isfinite(shift):
        raise NumericalError("posterior mass vanished inside the window")
    p = np.exp(loge - shift)
    zsum = float(np.sum(p))
    log_integral = shift + math.log(zsum)
    prob = p / zsum
    u = prob @ points
    dev = points - u[None, :]
    m2 = float(prob @ np.einsum("ij,ij->i", dev, dev))
    extras = []
    for fn in extra_fns:
        vals = np.asarray(fn(points), dtype=np.float64)
        if vals.ndim == 1:
            extras.append(float(prob @ vals))
        else:
            extras.append(prob @ vals)
    return log_integral, u, m2, extras


def _close(a, b, tol):
    return np.all(np.abs(np.asarray(a) - np.asarray(b)) <= tol * (1.0 + np.abs(np.asarray(b))))


def _quadrature(prior: Prior, x: np.ndarray, params: EstimatorParams,
                cfg: QuadratureConfig, extra_fns=()):
    t, eps = params.t, params.eps
    prev = None
    for level in range(cfg.max_refine + 1):
        cur = _quadrature_pass(prior, x, t, eps, cfg, level, extra_fns)
        if prev is not None:
            log_ok = abs(cur[0] - prev[0]) <= cfg.refine_tol * (1.0 + abs(cur[0]))
            u_ok = _close(prev[1], cur[1], cfg.refine_tol)
            m2_ok = _close(prev[2], cur[2], cfg.refine_tol)
            extras_ok = all(
                _close(pe, ce, cfg.refine_tol)
                for pe, ce in zip(prev[3], cur[3])
            )
            if log_ok and u_ok and m2_ok and extras_ok:
                return cur
        prev = cur
    raise NumericalError(
        f"quadrature did not reach refine_tol={cfg.refine_tol} "
        f"after {cfg.max_refine} refinements"
    )


def posterior_summary_quadrature(
    prior: Prior, x, params: EstimatorParams,
    cfg: QuadratureConfig | None = None,
) -> PosteriorSummary:
    """Posterior summary by adaptive quadrature (dimensions 1-3)."""
    summary, _ = posterior_expectations(prior, x, params, (), cfg)
    return summary


def posterior_summary(prior: Prior, x, params: EstimatorParams,
                      cfg: QuadratureConfig | None = None) -> PosteriorSummary:
    """Posterior summary by closed form when one exists, else quadrature."""
    if isinstance(prior, ZeroPrior):
        return s_eps_closed_quadratic(0.0, x, params)
    if isinstance(prior, QuadraticPrior):
        return s_eps_closed_quadratic(prior.m, x, params)
    if isinstance(prior, WeightedL1Prior):
        return u_pm_closed_l1(prior.weights, x, params)
    return posterior_summary_quadrature(prior, x, params, cfg)


def posterior_expectations(
    prior: Prior, x, params: EstimatorParams, fns,
    cfg: QuadratureConfig | None = None,
):
    """Posterior summary plus expectations E[f(y)] in one quadrature.

    ``fns`` is a sequence of callables mapping an (N, n) array of points
    to (N,) or (N, k) values.  Returns (PosteriorSummary, list).
    """
    _require_pm_params(params)
    cfg = cfg or QuadratureConfig()
    x = _as_vector(x)
    n = x.size
    if n > 3:
        raise ValidationError("quadrature supports dimensions 1-3")
    if isinstance(prior, BallIndicatorPrior) and n > 2:
        raise ValidationError("ball-indicator quadrature supports dimensions 1-2")
    t, eps = params.t, params.eps
    log_integral, u, m2, extras = _quadrature(prior, x, params, cfg, fns)
    log_w = log_integral - 0.5 * n * math.log(2.0 * math.pi * t * eps)
    s = -eps * log_w
    grad = (x - u) / t
    lap = n / t - m2 / (t * t * eps)
    summary = PosteriorSummary(
        w_eps=min(math.exp(log_w), 1.0),
        s_eps=s,
        u_pm=u,
        mse=m2,
        grad_s_eps=grad,
        laplacian_s_eps=lap,
    )
    return summary, extras


# ---------------------------------------------------------------------------
# K_eps and its conjugate
# ---------------------------------------------------------------------------


def s_eps_value(prior: Prior, x, params: EstimatorParams,
                cfg: QuadratureConfig | None = None) -> float:
    """S_eps by closed form when available, quadrature otherwise."""
    x = _as_vector(x)
    if isinstance(prior, ZeroPrior):
        return s_eps_closed_quadratic(0.0, x, params).s_eps
    if isinstance(prior, QuadraticPrior):
        return s_eps_closed_quadratic(prior.m, x, params).s_eps
    if isinstance(prior, WeightedL1Prior):
        return u_pm_closed_l1(prior.weights, x, params).s_eps
    return posterior_summary_quadrature(prior, x, params, cfg).s_eps


def k_eps(prior: Prior, x, params: EstimatorParams,
          cfg: QuadratureConfig | None = None) -> float:
    """K_eps(x, t) = ||x||^2 / 2 - t S_eps(x, t); strictly convex in x."""
    _require_pm_params(params)
    x = _as_vector(x)
    return float(x @ x) / 2.0 - params.t * s_eps_value(prior, x, params, cfg)


def k_eps_grid(prior: Prior, xs: np.ndarray, params: EstimatorParams,
               cfg: QuadratureConfig | None = None) -> np.ndarray:
    """K_eps over a vector of 1D points (vectorized closed forms)."""
    _require_pm_params(params)
    xs = np.asarray(xs, dtype=np.float64)
    t, eps = params.t, params.eps
    if isinstance(prior, (ZeroPrior, QuadraticPrior)):
        m = prior.m if isinstance(prior, QuadraticPrior) else 0.0
        shrink = 1.0 + m * t
        s = m * xs ** 2 / (2.0 * shrink) + 0.5 * eps * math.log(shrink)
        return xs ** 2 / 2.0 - t * s
    if isinstance(prior, WeightedL1Prior):
        if prior.dim != 1:
            raise ValidationError("k_eps_grid needs a one-dimensional prior")
        w = float(prior.weights[0])
        scale = math.sqrt(2.0 * t * eps)
        lp = _log_l((xs + t * w) / scale)
        lm = _log_l((-xs + t * w) / scale)
        s = xs ** 2 / (2.0 * t) - eps * np.logaddexp(lp, lm)
        return xs ** 2 / 2.0 - t * s
    return np.array([k_eps(prior, [xv], params, cfg) for xv in xs])


def k_eps_conjugate_1d(prior: Prior, y: float, params: EstimatorParams,
                       grid, cfg: QuadratureConfig | None = None) -> float:
    """Discrete Legendre transform K_eps*(y, t) = max_x (x y - K_eps(x, t)).

    Raises NumericalError when the argmax sits on a grid endpoint (the
    grid window does not bracket the true supremum).
    """
    k_vals = k_eps_grid(prior, grid.values, params, cfg)
    scores = grid.values * y - k_vals
    best = int(np.argmax(scores))
    if best in (0, grid.count - 1):
        raise NumericalError("conjugate argmax on grid endpoint; widen the grid")
    return float(scores[best])


# ---------------------------------------------------------------------------
# Moreau smoothing and the mean minimal subgradient
# ---------------------------------------------------------------------------


class MoreauSmoothedPrior(Prior):
    """The Moreau envelope y -> S0(y, mu) of a base prior, as a prior.

    Always finite, differentiable, and convex on all of space, with the
    same infimum 0; used to transport posterior-mean computations for
    constrained priors onto full-space smooth ones.
    """

    kind = "MoreauSmoothed"

    def __init__(self, base: Prior, mu: float):
        if mu <= 0 or not math.isfinite(mu):
            raise ValidationError("mu must be a positive finite real")
        self.base = base
        self.mu = float(mu)
        self.dim = base.dim

    def _prox_base_batch(self, Y: np.ndarray, s: float) -> np.ndarray:
        base = self.base
        if isinstance(base, ZeroPrior):
            return Y.copy()
        if isinstance(base, QuadraticPrior):
            return Y / (1.0 + base.m * s)
        if isinstance(base, WeightedL1Prior):
            return np.sign(Y) * np.maximum(np.abs(Y) - s * base.weights, 0.0)
        if isinstance(base, BallIndicatorPrior):
            norms = np.sqrt(np.einsum("ij,ij->i", Y, Y))
            scale = np.minimum(1.0, base.radius / np.maximum(norms, 1e-300))
            # pull strictly inside so roundoff cannot put the projection
            # outside the ball, where the base evaluates to infinity
            scale = np.where(norms > base.radius, scale * (1.0 - 2.0**-50), scale)
            return Y * scale[:, None]
        return np.stack([base.prox(row, s) for row in Y])

    def eval_batch(self, Y):
        Y = self._check_batch(Y)
        P = self._prox_base_batch(Y, self.mu)
        dev = Y - P
        return (
            np.einsum("ij,ij->i", dev, dev) / (2.0 * self.mu)
            + self.base.eval_batch(P)
        )

    def prox(self, x, t):
        # prox of the envelope: x + t/(t+mu) (prox_{(t+mu) J}(x) - x)
        x = self._check_vector(x)
        if t <= 0:
            raise ValidationError("t must be positive")
        base_prox = self.base.prox(x, t + self.mu)
        return x + (t / (t + self.mu)) * (base_prox - x)

    def min_subgradient_batch(self, Y):
        Y = self._check_batch(Y)
        return (Y - self._prox_base_batch(Y, self.mu)) / self.mu

    def kinks(self, i):
        # the envelope is C^1 but its curvature breaks where the base prox
        # switches regime; quadrature panels must split there
        base = self.base
        if isinstance(base, WeightedL1Prior):
            w = float(base.weights[i])
            return (-self.mu * w, self.mu * w)
        if isinstance(base, BallIndicatorPrior):
            return (-base.radius, base.radius)
        return ()

    def to_json(self):
        return {
            "kind": "MoreauSmoothed",
            "mu": self.mu,
            "base": self.base.to_json(),
        }


def pm_via_moreau_smoothing(prior: Prior, x, params: EstimatorParams,
                            mu_seq, cfg: QuadratureConfig | None = None):
    """Posterior means under Moreau-smoothed priors S0(., mu_k), mu_k down
    to 0; the sequence approaches the posterior mean under the base prior."""
    _require_pm_params(params)
    mu_seq = [float(mu) for mu in mu_seq]
    if not mu_seq or any(mu <= 0 for mu in mu_seq):
        raise ValidationError("mu_seq must contain positive reals")
    if any(b >= a for a, b in zip(mu_seq, mu_seq[1:])):
        raise ValidationError("mu_seq must be strictly decreasing")
    out = []
    for mu in mu_seq:
        smoothed = MoreauSmoothedPrior(prior, mu)
        out.append(
            posterior_summary_quadrature(smoothed, x, params, cfg).u_pm
        )
    return out


def mean_min_subgradient(prior: Prior, x, params: EstimatorParams,
                         cfg: QuadratureConfig | None = None) -> np.ndarray:
    """E[pi_{dJ(y)}(0)] under the posterior; equals grad_x S_eps when dom J
    is all of space."""
    if isinstance(prior, BallIndicatorPrior):
        raise ValidationError(
            "mean_min_subgradient requires a full-space prior"
        )
    _, extras = posterior_expectations(
        prior, x, params, (prior.min_subgradient_batch,), cfg
    )
    return extras[0]
