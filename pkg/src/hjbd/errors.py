"""Exception types shared across the package.

The CLI maps ValidationError to exit code 1 and NumericalError to exit
code 2; library code raises them directly.
"""


class ValidationError(ValueError):
    """Bad user input: parameters, dimensions, file formats, flag values."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its stated tolerance."""
