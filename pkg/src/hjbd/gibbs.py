"""Gibbs sampling for the anisotropic-TV image posterior.

The posterior over images y given data x is proportional to
exp(-(||x - y||^2/(2t) + lam * TV(y))/eps) with the anisotropic
4-neighbor total variation.  Holding all pixels but one fixed, the
conditional density of a single pixel is piecewise Gaussian: between
consecutive sorted neighbor values the TV term is affine, so each
segment carries a Gaussian with the same curvature 1/(t*eps) and a
segment-dependent mean x_i - t*lam*(2k - K).  This structure admits
exact single-site sampling with no tuning: compute each segment's mass
with complementary-error-function differences in log space, choose a
segment, and invert the truncated-Gaussian CDF inside it.

``sample_piecewise_gaussian`` is the reference sampler (plain bisection
to 1e-12 on the CDF).  ``posterior_mean_mcmc`` runs raster-scan sweeps
in a compiled kernel; the kernel's inverter is a bracketed Newton
iteration on the log-CDF, terminating at a CDF error of 1e-13, strictly
tighter than the reference tolerance.  Each chain c is seeded with
seed + c through a splitmix64 expansion into xoshiro256++ state, so
results are bit-identical across reruns for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import log_ndtr

from .errors import NumericalError, ValidationError
from .imaging import Image

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_NEG_INF_Z = -1e308
_POS_INF_Z = 1e308


@dataclass(frozen=True)
class SamplerConfig:
    """Gibbs run controls; defaults target desk-scale 64x64 images."""

    sweeps: int = 20000
    burn_in: int = 2000
    seed: int = 0
    chains: int = 4
    thin: int = 1

    def __post_init__(self):
        if self.burn_in < 0 or self.sweeps <= self.burn_in:
            raise ValidationError("need sweeps > burn_in >= 0")
        if self.chains < 1:
            raise ValidationError("chains must be at least 1")
        if self.thin < 1:
            raise ValidationError("thin must be at least 1")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class PiecewiseGaussian1D:
    """Density proportional to exp(-(a y^2/2 - b y + c)) per segment.

    ``breakpoints`` holds the sorted neighbor values (duplicates allowed;
    the zero-width segments between equal values carry zero mass).  The
    per-segment arrays have one more entry than ``breakpoints``.
    """

    breakpoints: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        a = np.asarray(self.a, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if not (a.shape == b.shape == c.shape == (bp.size + 1,)):
            raise ValidationError("need one (a, b, c) triple per segment")
        if np.any(np.diff(bp) < 0):
            raise ValidationError("breakpoints must be sorted")
        if np.any(a <= 0) or not np.all(np.isfinite(a)):
            raise ValidationError("every segment needs positive curvature a")
        # the log-density must be continuous across each breakpoint
        for j, v in enumerate(bp):
            left = 0.5 * a[j] * v * v - b[j] * v + c[j]
            right = 0.5 * a[j + 1] * v * v - b[j + 1] * v + c[j + 1]
            if abs(left - right) > 1e-9 * (1.0 + abs(left) + abs(right)):
                raise ValidationError(
                    f"log-density discontinuous at breakpoint {v}"
                )

    def segment_bounds(self, j: int):
        lo = -math.inf if j == 0 else float(self.breakpoints[j - 1])
        hi = math.inf if j == self.breakpoints.size else float(self.breakpoints[j])
        return lo, hi

    def log_masses(self) -> np.ndarray:
        """Exact log of each segment's integral."""
        out = np.empty(self.a.size)
        for j in range(self.a.size):
            aj, bj, cj = self.a[j], self.b[j], self.c[j]
            mu = bj / aj
            sigma = 1.0 / math.sqrt(aj)
            lo, hi = self.segment_bounds(j)
            zlo = (lo - mu) / sigma if math.isfinite(lo) else -math.inf
            zhi = (hi - mu) / sigma if math.isfinite(hi) else math.inf
            out[j] = (
                0.5 * bj * bj / aj - cj + _HALF_LOG_2PI + math.log(sigma)
                + _log_phi_diff(zlo, zhi)
            )
        return out

    def moments(self):
        """Exact mean and variance by truncated-Gaussian segment moments."""
        lm = self.log_masses()
        shift = np.max(lm)
        if not math.isfinite(shift):
            raise NumericalError("piecewise-Gaussian density has zero mass")
        weights = np.exp(lm - shift)
        weights /= weights.sum()
        mean = 0.0
        second = 0.0
        for j in range(self.a.size):
            if weights[j] == 0.0:
                continue
            mu = self.b[j] / self.a[j]
            sigma = 1.0 / math.sqrt(self.a[j])
            lo, hi = self.segment_bounds(j)
            zlo = (lo - mu) / sigma if math.isfinite(lo) else -math.inf
            zhi = (hi - mu) / sigma if math.isfinite(hi) else math.inf
            # normalized pdf values at the ends, relative to segment mass
            lpd = _log_phi_diff(zlo, zhi)
            plo = (
                math.exp(-0.5 * zlo * zlo - _HALF_LOG_2PI - lpd)
                if math.isfinite(zlo)
                else 0.0
            )
            phi_ = (
                math.exp(-0.5 * zhi * zhi - _HALF_LOG_2PI - lpd)
                if math.isfinite(zhi)
                else 0.0
            )
            ratio = plo - phi_
            seg_mean = mu + sigma * ratio
            zl_term = zlo * plo if math.isfinite(zlo) else 0.0
            zh_term = zhi * phi_ if math.isfinite(zhi) else 0.0
            seg_var = sigma * sigma * (1.0 + zl_term - zh_term - ratio * ratio)
            mean += weights[j] * seg_mean
            second += weights[j] * (seg_var + seg_mean * seg_mean)
        return mean, second - mean * mean


@dataclass(frozen=True)
class McmcResult:
    """Posterior-mean estimate with Monte-Carlo diagnostics.

    mean_image averages the kept (post burn-in, thinned, split-half)
    samples across all chains; var_image is the pooled per-pixel
    posterior-variance estimate; stderr_image is the Monte-Carlo
    standard error of mean_image from the split-chain spread;
    accepted_sweeps counts kept samples summed over chains.
    """

    mean_image: Image
    stderr_image: Image
    var_image: Image
    rhat_max: float
    accepted_sweeps: int
    converged: bool


def _log_phi_diff(zlo: float, zhi: float) -> float:
    """log(Phi(zhi) - Phi(zlo)) for the standard normal, stable in both
    tails; -inf for an empty interval."""
    if zhi <= zlo:
        return -math.inf
    if not math.isfinite(zhi):
        if not math.isfinite(zlo):
            return 0.0
        return float(log_ndtr(-zlo))
    if not math.isfinite(zlo):
        return float(log_ndtr(zhi))
    if zlo + zhi > 0.0:
        zlo, zhi = -zhi, -zlo
    la = float(log_ndtr(zlo))
    lb = float(log_ndtr(zhi))
    if la >= lb:
        return -math.inf
    return lb + math.log1p(-math.exp(la - lb))


def conditional_density(image_state, pixel_index, x: Image, t: float,
                        eps: float, lam: float) -> PiecewiseGaussian1D:
    """Single-pixel conditional of the TV posterior given the rest of the
    image; breakpoints are the (sorted) current neighbor values."""
    state = np.asarray(image_state, dtype=np.float64)
    if not isinstance(x, Image):
        raise ValidationError("x must be an Image")
    if state.shape != x.pixels.shape:
        raise ValidationError("image_state shape must match the data image")
    for name, val in (("t", t), ("eps", eps), ("lam", lam)):
        if not (math.isfinite(val) and val > 0):
            raise ValidationError(f"{name} must be a positive finite real")
    i, j = pixel_index
    h, w = state.shape
    if not (0 <= i < h and 0 <= j < w):
        raise ValidationError("pixel index out of range")
    neighbors = []
    if i > 0:
        neighbors.append(state[i - 1, j])
    if i < h - 1:
        neighbors.append(state[i + 1, j])
    if j > 0:
        neighbors.append(state[i, j - 1])
    if j < w - 1:
        neighbors.append(state[i, j + 1])
    nb = np.sort(np.array(neighbors, dtype=np.float64))
    big_k = nb.size
    xij = float(x.pixels[i, j])
    te = t * eps
    prefix = np.concatenate(([0.0], np.cumsum(nb)))
    total = prefix[-1]
    ks = np.arange(big_k + 1)
    slopes = 2.0 * ks - big_k
    a = np.full(big_k + 1, 1.0 / te)
    b = xij / te - lam * slopes / eps
    c = xij * xij / (2.0 * te) + lam * (total - 2.0 * prefix) / eps
    return PiecewiseGaussian1D(breakpoints=nb, a=a, b=b, c=c)


def _invert_truncated_cdf_bisect(mu, sigma, zlo, zhi, u):
    """Quantile of the [zlo, zhi]-truncated standard normal by plain
    bisection, to 1e-12 on the (conditional) CDF."""
    log_total = _log_phi_diff(zlo, zhi)
    if log_total == -math.inf:
        raise NumericalError("cannot sample from a zero-mass segment")
    target = log_total + math.log(u)
    if math.isfinite(zlo):
        lo = zlo
    else:
        ref = zhi if math.isfinite(zhi) else 0.0
        lo = -math.sqrt(ref * ref + 80.0) - 1.0
    if math.isfinite(zhi):
        hi = zhi
    else:
        ref = zlo if math.isfinite(zlo) else 0.0
        hi = math.sqrt(ref * ref + 80.0) + 1.0
    anchor = zlo if math.isfinite(zlo) else -math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lcdf = _log_phi_diff(anchor, mid)
        err = u * abs(math.expm1(lcdf - target)) if lcdf - target < 50 else 1.0
        if err <= 1e-12:
            return mu + sigma * mid
        if lcdf > target:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15 * (1.0 + abs(lo) + abs(hi)):
            break
    return mu + sigma * 0.5 * (lo + hi)


def sample_piecewise_gaussian(pg: PiecewiseGaussian1D, rng) -> float:
    """One exact draw: log-space segment masses, categorical segment
    choice, then truncated-Gaussian CDF inversion by bisection."""
    lm = pg.log_masses()
    shift = np.max(lm)
    if not math.isfinite(shift):
        raise NumericalError("piecewise-Gaussian density has zero mass")
    weights = np.exp(lm - shift)
    total = weights.sum()
    u1 = rng.random() * total
    acc = 0.0
    seg = weights.size - 1
    for j in range(weights.size):
        acc += weights[j]
        if u1 <= acc:
            seg = j
            break
    mu = pg.b[seg] / pg.a[seg]
    sigma = 1.0 / math.sqrt(pg.a[seg])
    lo, hi = pg.segment_bounds(seg)
    zlo = (lo - mu) / sigma if math.isfinite(lo) else -math.inf
    zhi = (hi - mu) / sigma if math.isfinite(hi) else math.inf
    u2 = rng.random()
    while u2 <= 0.0:
        u2 = rng.random()
    return _invert_truncated_cdf_bisect(mu, sigma, zlo, zhi, u2)


# ---------------------------------------------------------------------------
# compiled chain kernel
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (np.uint64(64) - k))


@njit(cache=True, inline="always")
def _next_uniform(state):
    # xoshiro256++: rotl(s0 + s3, 23) + s0, then the linear engine update
    result = _rotl(state[0] + state[3], np.uint64(23)) + state[0]
    tshift = state[1] << np.uint64(17)
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= tshift
    state[3] = _rotl(state[3], np.uint64(45))
    return (result >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _log_ndtr_k(z):
    if z > -36.0:
        return math.log(0.5 * math.erfc(-z / _SQRT2))
    zz = z * z
    series = 1.0 - 1.0 / zz + 3.0 / (zz * zz) - 15.0 / (zz * zz * zz) \
        + 105.0 / (zz * zz * zz * zz)
    return -0.5 * zz - math.log(-z) - _HALF_LOG_2PI + math.log(series)


@njit(cache=True, inline="always")
def _log_phi_diff_k(zlo, zhi):
    if zhi <= zlo:
        return -math.inf
    if zhi >= _POS_INF_Z:
        if zlo <= _NEG_INF_Z:
            return 0.0
        return _log_ndtr_k(-zlo)
    if zlo <= _NEG_INF_Z:
        return _log_ndtr_k(zhi)
    if zlo + zhi > 0.0:
        tmp = zlo
        zlo = -zhi
        zhi = -tmp
    la = _log_ndtr_k(zlo)
    lb = _log_ndtr_k(zhi)
    if la >= lb:
        return -math.inf
    return lb + math.log1p(-math.exp(la - lb))


@njit(cache=True, inline="always")
def _trunc_quantile_k(zlo, zhi, u):
    """Solve Phidiff(zlo, z)/Phidiff(zlo, zhi) = u by bracketed Newton on
    the log-CDF; terminates at CDF error 1e-13."""
    log_total = _log_phi_diff_k(zlo, zhi)
    target = log_total + math.log(u)
    if zlo > _NEG_INF_Z:
        lo = zlo
    else:
        ref = zhi if zhi < _POS_INF_Z else 0.0
        lo = -math.sqrt(ref * ref + 80.0) - 1.0
    if zhi < _POS_INF_Z:
        hi = zhi
    else:
        ref = zlo if zlo > _NEG_INF_Z else 0.0
        hi = math.sqrt(ref * ref + 80.0) + 1.0
    z = 0.5 * (lo + hi)
    for _ in range(100):
        lcdf = _log_phi_diff_k(zlo, z)
        diff = lcdf - target
        err = u * abs(math.expm1(diff)) if diff < 50.0 else 1.0
        if err <= 1e-13:
            return z
        if diff > 0.0:
            hi = z
        else:
            lo = z
        if hi - lo < 1e-14 * (1.0 + abs(lo) + abs(hi)):
            return 0.5 * (lo + hi)
        deriv = math.exp(-0.5 * z * z - _HALF_LOG_2PI - lcdf)
        if math.isfinite(deriv) and deriv > 0.0:
            znew = z - diff / deriv
            if znew <= lo or znew >= hi:
                znew = 0.5 * (lo + hi)
        else:
            znew = 0.5 * (lo + hi)
        z = znew
    return z


@njit(cache=True)
def _run_chain(xpix, t, eps, lam, sweeps, burn_in, thin, n_keep, n_half,
               state, mean_acc, m2_acc, counts):
    h, w = xpix.shape
    y = xpix.copy()
    te = t * eps
    inv_te = 1.0 / te
    sigma = math.sqrt(te)
    nb = np.empty(4)
    logmass = np.empty(5)
    mus = np.empty(5)
    for sweep in range(sweeps):
        for i in range(h):
            for j in range(w):
                xij = xpix[i, j]
                big_k = 0
                if i > 0:
                    nb[big_k] = y[i - 1, j]
                    big_k += 1
                if i < h - 1:
                    nb[big_k] = y[i + 1, j]
                    big_k += 1
                if j > 0:
                    nb[big_k] = y[i, j - 1]
                    big_k += 1
                if j < w - 1:
                    nb[big_k] = y[i, j + 1]
                    big_k += 1
                for p in range(1, big_k):
                    v = nb[p]
                    q = p - 1
                    while q >= 0 and nb[q] > v:
                        nb[q + 1] = nb[q]
                        q -= 1
                    nb[q + 1] = v
                total = 0.0
                for p in range(big_k):
                    total += nb[p]
                best = -math.inf
                prefix = 0.0
                for k in range(big_k + 1):
                    slope = float(2 * k - big_k)
                    mu = xij - t * lam * slope
                    # segment log-mass up to a common constant
                    g = (mu * mu - xij * xij) * 0.5 * inv_te \
                        - lam * (total - 2.0 * prefix) / eps
                    zlo = (nb[k - 1] - mu) / sigma if k > 0 else _NEG_INF_Z
                    zhi = (nb[k] - mu) / sigma if k < big_k else _POS_INF_Z
                    logmass[k] = g + _log_phi_diff_k(zlo, zhi)
                    mus[k] = mu
                    if logmass[k] > best:
                        best = logmass[k]
                    if k < big_k:
                        prefix += nb[k]
                norm = 0.0
                for k in range(big_k + 1):
                    norm += math.exp(logmass[k] - best)
                u1 = _next_uniform(state) * norm
                seg = big_k
                acc = 0.0
                for k in range(big_k + 1):
                    acc += math.exp(logmass[k] - best)
                    if u1 <= acc:
                        seg = k
                        break
                mu = mus[seg]
                zlo = (nb[seg - 1] - mu) / sigma if seg > 0 else _NEG_INF_Z
                zhi = (nb[seg] - mu) / sigma if seg < big_k else _POS_INF_Z
                u2 = _next_uniform(state)
                while u2 <= 0.0:
                    u2 = _next_uniform(state)
                z = _trunc_quantile_k(zlo, zhi, u2)
                y[i, j] = mu + sigma * z
        if sweep >= burn_in and (sweep - burn_in) % thin == 0:
            ki = (sweep - burn_in) // thin
            slot = -1
            if ki < n_half:
                slot = 0
            elif ki >= n_keep - n_half:
                slot = 1
            if slot >= 0:
                counts[slot] += 1
                cnt = float(counts[slot])
                for i in range(h):
                    for j in range(w):
                        d = y[i, j] - mean_acc[slot, i, j]
                        mean_acc[slot, i, j] += d / cnt
                        m2_acc[slot, i, j] += d * (y[i, j] - mean_acc[slot, i, j])


def _seed_state(seed: int) -> np.ndarray:
    """splitmix64 expansion of a 64-bit seed into xoshiro256++ state."""
    mask = (1 << 64) - 1
    z = seed & mask
    words = []
    for _ in range(4):
        z = (z + 0x9E3779B97F4A7C15) & mask
        w = z
        w = ((w ^ (w >> 30)) * 0xBF58476D1CE4E5B9) & mask
        w = ((w ^ (w >> 27)) * 0x94D049BB133111EB) & mask
        w ^= w >> 31
        words.append(w)
    return np.array(words, dtype=np.uint64)


def posterior_mean_mcmc(x: Image, t: float, eps: float, lam: float,
                        cfg: SamplerConfig | None = None) -> McmcResult:
    """Raster-scan Gibbs estimate of the TV posterior mean.

    Every chain starts at the data and runs ``sweeps`` full sweeps; the
    post burn-in samples are split into two halves per chain for the
    split-chain R-hat diagnostic.  A result with rhat_max > 1.1 is
    returned with ``converged`` set to False rather than raised.
    """
    if not isinstance(x, Image):
        raise ValidationError("x must be an Image")
    for name, val in (("t", t), ("eps", eps), ("lam", lam)):
        if not (math.isfinite(val) and val > 0):
            raise ValidationError(f"{name} must be a positive finite real")
    cfg = cfg or SamplerConfig()
    n_keep = (cfg.sweeps - cfg.burn_in + cfg.thin - 1) // cfg.thin
    n_half = n_keep // 2
    if n_half < 2:
        raise ValidationError(
            "need at least 4 kept samples for split-chain diagnostics"
        )
    h, w = x.pixels.shape
    seq_means = np.empty((2 * cfg.chains, h, w))
    seq_vars = np.empty((2 * cfg.chains, h, w))
    for chain in range(cfg.chains):
        mean_acc = np.zeros((2, h, w))
        m2_acc = np.zeros((2, h, w))
        counts = np.zeros(2, dtype=np.int64)
        state = _seed_state(cfg.seed + chain)
        _run_chain(
            x.pixels, float(t), float(eps), float(lam),
            cfg.sweeps, cfg.burn_in, cfg.thin, n_keep, n_half,
            state, mean_acc, m2_acc, counts,
        )
        seq_means[2 * chain] = mean_acc[0]
        seq_means[2 * chain + 1] = mean_acc[1]
        seq_vars[2 * chain] = m2_acc[0] / (counts[0] - 1)
        seq_vars[2 * chain + 1] = m2_acc[1] / (counts[1] - 1)
    n_seq = 2 * cfg.chains
    within = seq_vars.mean(axis=0)
    grand = seq_means.mean(axis=0)
    if n_seq > 1:
        between = n_half * seq_means.var(axis=0, ddof=1)
        var_plus = (n_half - 1) / n_half * within + between / n_half
    else:
        var_plus = within
    safe_within = np.where(within > 0, within, 1.0)
    rhat = np.sqrt(np.maximum(var_plus / safe_within, 1.0))
    rhat = np.where((within == 0) & (var_plus == 0), 1.0, rhat)
    rhat_max = float(np.max(rhat))
    stderr = np.sqrt(var_plus / (n_seq * n_half))
    return McmcResult(
        mean_image=Image(width=w, height=h, pixels=grand),
        stderr_image=Image(width=w, height=h, pixels=stderr),
        var_image=Image(width=w, height=h, pixels=var_plus),
        rhat_max=rhat_max,
        accepted_sweeps=int(n_seq * n_half),
        converged=rhat_max <= 1.1,
    )
