"""Convex regularizers with proximal maps, subgradients, and domain tests.

Every prior J here is proper, lower semicontinuous, convex, nonnegative,
and normalized so that inf J = 0 holds exactly by construction.  The five
kinds are the zero prior, the quadratic (Tikhonov) prior, the weighted
l1 prior, anisotropic total variation on a 2D lattice, and the indicator
of a Euclidean ball.  Only the ball has a domain smaller than full space.
"""

from __future__ import annotations

import json
import math
from enum import Enum

import numpy as np
from scipy.optimize import lsq_linear

from . import imaging
from .errors import ValidationError


class DomainLocation(Enum):
    """Position of a point relative to dom J."""

    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


class Prior:
    """Base class for convex regularizers.

    Subclasses must set ``kind`` and implement ``eval_batch``, ``prox``,
    ``min_subgradient_batch``, and ``to_json``.  ``dim`` is None for
    priors defined in every dimension and a fixed integer otherwise.
    """

    kind = "abstract"
    dim: int | None = None

    # -- helpers ---------------------------------------------------

    def _check_vector(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=np.float64))
        if y.ndim != 1:
            raise ValidationError("expected a 1D vector")
        if self.dim is not None and y.size != self.dim:
            raise ValidationError(
                f"{self.kind} prior has dimension {self.dim}, got {y.size}"
            )
        return y

    def _check_batch(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2:
            raise ValidationError("expected an (N, n) batch of vectors")
        if self.dim is not None and Y.shape[1] != self.dim:
            raise ValidationError(
                f"{self.kind} prior has dimension {self.dim}, got {Y.shape[1]}"
            )
        return Y

    # -- core operations -------------------------------------------

    def eval(self, y) -> float:
        """J(y), +inf exactly when y lies outside dom J."""
        y = self._check_vector(y)
        return float(self.eval_batch(y[None, :])[0])

    def eval_batch(self, Y) -> np.ndarray:
        raise NotImplementedError

    def prox(self, x, t: float) -> np.ndarray:
        """The unique minimizer of ||x - y||^2 / (2t) + J(y)."""
        raise NotImplementedError

    def min_subgradient(self, y) -> np.ndarray:
        """Minimal-norm element of the subdifferential at y."""
        y = self._check_vector(y)
        return self.min_subgradient_batch(y[None, :])[0]

    def min_subgradient_batch(self, Y) -> np.ndarray:
        raise NotImplementedError

    def strong_convexity(self) -> float:
        return 0.0

    def domain_contains(self, y) -> DomainLocation:
        self._check_vector(y)
        return DomainLocation.INTERIOR

    def kinks(self, i: int) -> tuple:
        """Nondifferentiability points of coordinate i, used as quadrature
        piece boundaries.  Empty for smooth or non-separable priors."""
        return ()

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return json.dumps(self.to_json())


def _check_positive(value, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be a positive finite real")
    return value


class ZeroPrior(Prior):
    """J identically 0 on all of space."""

    kind = "Zero"

    def eval_batch(self, Y):
        Y = self._check_batch(Y)
        return np.zeros(Y.shape[0])

    def prox(self, x, t):
        x = self._check_vector(x)
        _check_positive(t, "t")
        return x.copy()

    def min_subgradient_batch(self, Y):
        return np.zeros_like(self._check_batch(Y))

    def to_json(self):
        return {"kind": "Zero"}


class QuadraticPrior(Prior):
    """J(y) = (m/2) ||y||^2, strongly convex with modulus m."""

    kind = "Quadratic"

    def __init__(self, m: float):
        self.m = _check_positive(m, "m")

    def eval_batch(self, Y):
        Y = self._check_batch(Y)
        return 0.5 * self.m * np.sum(Y * Y, axis=1)

    def prox(self, x, t):
        x = self._check_vector(x)
        t = _check_positive(t, "t")
        return x / (1.0 + self.m * t)

    def min_subgradient_batch(self, Y):
        return self.m * self._check_batch(Y)

    def strong_convexity(self):
        return self.m

    def to_json(self):
        return {"kind": "Quadratic", "m": self.m}


class WeightedL1Prior(Prior):
    """J(y) = sum_i w_i |y_i| with positive weights."""

    kind = "WeightedL1"

    def __init__(self, weights):
        w = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        if w.ndim != 1 or w.size == 0:
            raise ValidationError("lambda must be a nonempty vector")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("lambda entries must be positive reals")
        self.weights = w
        self.dim = w.size

    def eval_batch(self, Y):
        Y = self._check_batch(Y)
        return np.sum(self.weights * np.abs(Y), axis=1)

    def prox(self, x, t):
        x = self._check_vector(x)
        t = _check_positive(t, "t")
        return np.sign(x) * np.maximum(np.abs(x) - t * self.weights, 0.0)

    def min_subgradient_batch(self, Y):
        Y = self._check_batch(Y)
        return self.weights * np.sign(Y)

    def kinks(self, i):
        return (0.0,)

    def to_json(self):
        return {"kind": "WeightedL1", "lambda": self.weights.tolist()}


class AnisotropicTV2DPrior(Prior):
    """J(y) = lambda * TV(y) on a width x height lattice (4-neighbor edges).

    Vectors are row-major flattenings of the image.  The proximal map
    delegates to the ROF solver in :mod:`hjbd.imaging`.
    """

    kind = "AnisotropicTV2D"

    def __init__(self, lam: float, width: int, height: int):
        self.lam = _check_positive(lam, "lambda")
        self.width = int(width)
        self.height = int(height)
        if self.width < 1 or self.height < 1:
            raise ValidationError("width and height must be positive integers")
        self.dim = self.width * self.height

    def _to_grid(self, Y):
        return Y.reshape(Y.shape[0], self.height, self.width)

    def eval_batch(self, Y):
        Y = self._check_batch(Y)
        return self.lam * np.atleast_1d(imaging.tv_sum(self._to_grid(Y)))

    def prox(self, x, t):
        x = self._check_vector(x)
        t = _check_positive(t, "t")
        img = imaging.Image.from_array(x.reshape(self.height, self.width))
        return imaging.rof_map(img, t, self.lam).pixels.ravel()

    def _edge_incidence(self):
        """Rows of the signed edge-incidence matrix, one per 4-neighbor edge."""
        w, h = self.width, self.height
        edges = []
        for r in range(h):
            for c in range(w):
                i = r * w + c
                if c + 1 < w:
                    edges.append((i, i + 1))
                if r + 1 < h:
                    edges.append((i, i + w))
        return edges

    def min_subgradient_batch(self, Y):
        Y = self._check_batch(Y)
        return np.stack([self._min_subgradient_one(y) for y in Y])

    def _min_subgradient_one(self, y):
        edges = self._edge_incidence()
        diffs = np.array([y[a] - y[b] for a, b in edges])
        tied = diffs == 0.0
        g = np.zeros_like(y)
        for (a, b), d in zip(edges, diffs):
            s = np.sign(d)
            g[a] += self.lam * s
            g[b] -= self.lam * s
        if not np.any(tied):
            return g
        # Minimal-norm selection: subgradients are lam * E^T q with q_e
        # fixed to sign(d_e) on strict edges and free in [-1, 1] on tied
        # edges.  Minimize ||g + lam * E_tied^T q|| over the box.
        free = [e for e, is_tied in zip(edges, tied) if is_tied]
        A = np.zeros((y.size, len(free)))
        for col, (a, b) in enumerate(free):
            A[a, col] = self.lam
            A[b, col] = -self.lam
        sol = lsq_linear(A, -g, bounds=(-1.0, 1.0), tol=1e-14)
        return g + A @ sol.x

    def to_json(self):
        return {
            "kind": "AnisotropicTV2D",
            "lambda": self.lam,
            "width": self.width,
            "height": self.height,
        }


class BallIndicatorPrior(Prior):
    """Indicator of the closed Euclidean ball of given radius: 0 inside,
    +inf outside."""

    kind = "BallIndicator"

    def __init__(self, radius: float):
        self.radius = _check_positive(radius, "radius")

    @staticmethod
    def _norms(Y) -> np.ndarray:
        # single norm implementation shared by every membership test, so
        # that prox / eval / domain_contains agree to the last ulp
        return np.sqrt(np.einsum("ij,ij->i", Y, Y))

    def _norm1(self, y) -> float:
        return float(self._norms(np.asarray(y, dtype=np.float64)[None, :])[0])

    def eval_batch(self, Y):
        Y = self._check_batch(Y)
        out = np.zeros(Y.shape[0])
        out[self._norms(Y) > self.radius] = math.inf
        return out

    def prox(self, x, t):
        x = self._check_vector(x)
        _check_positive(t, "t")
        norm = self._norm1(x)
        if norm <= self.radius:
            return x.copy()
        z = x * (self.radius / norm)
        # rounding can leave the scaled point a few ulps outside the ball;
        # shrink until membership holds exactly
        while self._norm1(z) > self.radius:
            z *= 1.0 - 2.0 ** -52
        return z

    def min_subgradient_batch(self, Y):
        Y = self._check_batch(Y)
        if np.any(self._norms(Y) > self.radius):
            raise ValidationError("point outside the ball has no subgradient")
        # 0 is in the normal cone at every point of the ball, including
        # the boundary, so the minimal-norm subgradient is always 0.
        return np.zeros_like(Y)

    def domain_contains(self, y):
        y = self._check_vector(y)
        norm = self._norm1(y)
        if norm < self.radius:
            return DomainLocation.INTERIOR
        if norm == self.radius:
            return DomainLocation.BOUNDARY
        return DomainLocation.OUTSIDE

    def to_json(self):
        return {"kind": "BallIndicator", "radius": self.radius}


def prior_from_json(descriptor) -> Prior:
    """Build a prior from a JSON descriptor ``{"kind": ..., params...}``.

    Accepts either a JSON string or an already-parsed mapping.
    """
    if isinstance(descriptor, (str, bytes)):
        try:
            descriptor = json.loads(descriptor)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid prior JSON: {exc}") from exc
    if not isinstance(descriptor, dict):
        raise ValidationError("prior descriptor must be a JSON object")
    data = dict(descriptor)
    kind = data.pop("kind", None)
    try:
        if kind == "Zero":
            _reject_extras(data)
            return ZeroPrior()
        if kind == "Quadratic":
            m = data.pop("m")
            _reject_extras(data)
            return QuadraticPrior(m)
        if kind == "WeightedL1":
            weights = data.pop("lambda")
            _reject_extras(data)
            return WeightedL1Prior(weights)
        if kind == "AnisotropicTV2D":
            lam = data.pop("lambda")
            width = data.pop("width")
            height = data.pop("height")
            _reject_extras(data)
            return AnisotropicTV2DPrior(lam, width, height)
        if kind == "BallIndicator":
            radius = data.pop("radius")
            _reject_extras(data)
            return BallIndicatorPrior(radius)
    except KeyError as exc:
        raise ValidationError(
            f"prior kind {kind!r} is missing parameter {exc.args[0]!r}"
        ) from exc
    raise ValidationError(f"unknown prior kind {kind!r}")


def _reject_extras(data: dict) -> None:
    if data:
        raise ValidationError(
            f"unexpected prior parameters: {sorted(data)}"
        )
