"""Bayesian MAP and posterior-mean denoising estimators via Hamilton-Jacobi
PDE representations, with a TV Gibbs sampler and a verification suite."""

from .errors import NumericalError, ValidationError

__all__ = ["NumericalError", "ValidationError", "__version__"]

__version__ = "0.1.0"
