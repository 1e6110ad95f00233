"""Moreau-Yosida envelope, MAP estimator, and discrete Hopf cross-checks.

S0(x, t) = min_y ||x - y||^2 / (2t) + J(y) solves the first-order
Hamilton-Jacobi equation dS/dt + ||grad S||^2 / 2 = 0 with initial data J.
The minimizer is the proximal point (the MAP estimate) and the spatial
gradient is (x - minimizer)/t.  An equivalent value comes from the Hopf
formula, the convex conjugate of (t/2) p^2 + J*(p); this module computes
both on 1D grids as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .priors import Prior


@dataclass(frozen=True)
class EnvelopeResult:
    """Envelope value S0, its minimizer (the MAP point), and grad_x S0."""

    value: float
    minimizer: np.ndarray
    gradient: np.ndarray


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid used by the discrete Legendre transforms."""

    lo: float
    hi: float
    count: int
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValidationError("grid bounds must be finite")
        if self.hi <= self.lo:
            raise ValidationError("grid needs hi > lo")
        if self.count < 3:
            raise ValidationError("grid needs at least 3 nodes")
        object.__setattr__(
            self, "values", np.linspace(self.lo, self.hi, self.count)
        )

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)


def envelope(prior: Prior, x, t: float) -> EnvelopeResult:
    """Evaluate S0(x, t) together with its minimizer and gradient."""
    if t <= 0:
        raise ValidationError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    minimizer = prior.prox(x, t)
    value = float(np.sum((x - minimizer) ** 2) / (2.0 * t) + prior.eval(minimizer))
    gradient = (x - minimizer) / t
    return EnvelopeResult(value=value, minimizer=minimizer, gradient=gradient)


def _legendre_max(scores: np.ndarray, tol: float):
    """Max of a score row plus whether the max is attained only at the ends.

    Ties within ``tol`` count as alternative argmax locations, so a flat
    score row (for example the zero prior at p = 0) is not flagged.
    """
    best = float(np.max(scores))
    near = np.flatnonzero(scores >= best - tol)
    endpoint_only = bool(np.all((near == 0) | (near == scores.size - 1)))
    return best, endpoint_only


def _discrete_conjugate(values: np.ndarray, grid_vals: np.ndarray,
                        probes: np.ndarray, chunk: int = 256):
    """f*(p) = max_y p y - f(y) over the grid, for each probe p.

    Returns the conjugate values and a boolean endpoint-argmax flag per
    probe (True when the max is attained only at a grid endpoint).
    """
    out = np.empty(probes.size)
    endpoint = np.zeros(probes.size, dtype=bool)
    span = float(np.max(np.abs(values[np.isfinite(values)]), initial=1.0))
    tol = 1e-12 * (1.0 + span + np.max(np.abs(grid_vals)) * np.max(np.abs(probes)))
    for start in range(0, probes.size, chunk):
        p = probes[start:start + chunk, None]
        scores = p * grid_vals[None, :] - values[None, :]
        for row in range(scores.shape[0]):
            out[start + row], endpoint[start + row] = _legendre_max(
                scores[row], tol
            )
    return out, endpoint


def hopf_check_1d(prior: Prior, grid: Grid1D, x: float, t: float):
    """Return (lax, hopf): the envelope value and its Hopf-formula twin.

    The Hopf value is the discrete Legendre transform of
    (t/2) p^2 + J*(p), with J* itself a discrete transform over the grid.
    Raises NumericalError when the decisive argmax sits on a grid
    endpoint, which means the grid window is too small to be trusted.
    """
    if prior.dim not in (None, 1):
        raise ValidationError("hopf_check_1d needs a one-dimensional prior")
    if t <= 0:
        raise ValidationError("t must be positive")
    lax = envelope(prior, np.array([x]), t).value

    ys = grid.values
    j_vals = prior.eval_batch(ys[:, None])
    j_conj, inner_endpoint = _discrete_conjugate(j_vals, ys, ys)

    outer_scores = x * ys - (0.5 * t * ys ** 2 + j_conj)
    tol = 1e-12 * (1.0 + float(np.max(np.abs(outer_scores))))
    hopf, outer_flag = _legendre_max(outer_scores, tol)
    if outer_flag:
        raise NumericalError(
            "hopf transform argmax on grid endpoint; widen the grid"
        )
    winner = int(np.argmax(outer_scores))
    if inner_endpoint[winner]:
        raise NumericalError(
            "inner conjugate argmax on grid endpoint; widen the grid"
        )
    return lax, float(hopf)


def grad_s0_limit_check(prior: Prior, y, t_seq) -> list:
    """grad_x S0(y, t_k) along a decreasing sequence t_k.

    As t_k drops to 0 these gradients approach the minimal-norm
    subgradient of J at y; the caller compares the tail against
    ``prior.min_subgradient(y)``.
    """
    t_seq = [float(t) for t in t_seq]
    if not t_seq or any(t <= 0 for t in t_seq):
        raise ValidationError("t_seq must contain positive reals")
    if any(b >= a for a, b in zip(t_seq, t_seq[1:])):
        raise ValidationError("t_seq must be strictly decreasing")
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    return [envelope(prior, y, t).gradient for t in t_seq]
