"""Exception types shared across the package."""

from __future__ import annotations

import numpy as np


class ConfigError(ValueError):
    """Raised when an experiment configuration fails to parse or validate."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its iteration budget.

    Carries the last iterate and its residual so callers can inspect how
    close the solver got.
    """

    def __init__(self, message: str, last_iterate: np.ndarray, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.last_iterate = np.asarray(last_iterate)
        self.residual = float(residual)


class SingularMatrixError(RuntimeError):
    """A matrix required to be invertible is numerically singular.

    Typically indicates a near-critical threshold parameter; ``det`` holds
    the offending determinant estimate.
    """

    def __init__(self, message: str, det: float):
        super().__init__(f"{message} (det={det:.3e})")
        self.det = float(det)


class InsufficientDataError(ValueError):
    """Not enough records of the required kind to run a statistical check."""
