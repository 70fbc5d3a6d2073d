"""Deterministic limit of the epidemic: attack rate, survivors, threshold.

The limiting per-type infection probability under exposure level t is

    r_i(t) = 1 - exp(-sum_k t_k pi_k mu[k, i]),

the attack rate tau is the largest fixed point of tau = r(tau + zeta), the
survivor fraction is sigma = 1 - tau, and the threshold parameter R is the
Perron-Frobenius eigenvalue of M Pi (M the matrix of scaled mean
infectivities, Pi = diag(pi)).  Major outbreaks are possible from small
seeds if and only if R > 1.

All functions here are pure; concurrent use is safe.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError

__all__ = [
    "Regime",
    "DeterministicSolution",
    "limit_infection_probability",
    "solve_tau",
    "compute_R",
    "check_irreducibility",
]

CRITICAL_TOL = 1e-9  # |R - 1| below this is labelled critical


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class DeterministicSolution:
    tau: np.ndarray
    sigma: np.ndarray
    R: float
    iterations: int
    residual: float
    regime: Regime
    # True when the fixed point may not be unique: reducible mean matrix
    # combined with a seed vector that leaves some types unseeded.
    nonuniqueness_risk: bool = False


def limit_infection_probability(t: np.ndarray, mu: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Evaluate r(t), the limiting probability that a type-i individual is
    infected when exposed to t_k * N * pi_k infectives of each type k."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("exposure levels must be nonnegative")
    return -np.expm1(-(t * pi) @ mu)


def _regime(R: float) -> Regime:
    if abs(R - 1.0) <= CRITICAL_TOL:
        return Regime.CRITICAL
    return Regime.SUPERCRITICAL if R > 1.0 else Regime.SUBCRITICAL


def solve_tau(mu: np.ndarray, pi: np.ndarray, zeta: np.ndarray,
              tol: float = 1e-12, max_iter: int = 1_000_000) -> DeterministicSolution:
    """Solve the attack-rate fixed point tau = r(tau + zeta).

    Iterates from tau = 1, which makes every step monotone nonincreasing and
    selects the largest fixed point; with no seed (zeta = 0) that is the
    nonzero attack rate whenever R > 1.  With zeta = 0 and R <= 1 the only
    fixed point is 0 and it is returned immediately (the plain iteration
    crawls sublinearly at criticality).

    Raises ConvergenceError carrying the last iterate if max_iter is hit.
    """
    mu = np.asarray(mu, dtype=float)
    pi = np.asarray(pi, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if np.any(mu < 0):
        raise ValueError("mu must be nonnegative")
    if np.any(zeta < 0):
        raise ValueError("zeta must be nonnegative")
    m = len(pi)

    R = compute_R(mu, pi)
    regime = _regime(R)
    irreducible = check_irreducibility(mu, pi)
    risk = (not irreducible) and bool(np.any(zeta == 0))

    if np.all(zeta == 0) and R <= 1.0 + CRITICAL_TOL:
        tau = np.zeros(m)
        return DeterministicSolution(tau=tau, sigma=1.0 - tau, R=R, iterations=0,
                                     residual=0.0, regime=regime,
                                     nonuniqueness_risk=risk)

    tau = np.ones(m)
    for it in range(1, max_iter + 1):
        nxt = limit_infection_probability(tau + zeta, mu, pi)
        if np.any(nxt > tau + 1e-15):
            raise RuntimeError("fixed-point iteration lost monotonicity")
        delta = float(np.max(np.abs(tau - nxt)))
        tau = nxt
        if delta <= tol:
            residual = float(np.max(np.abs(tau - limit_infection_probability(tau + zeta, mu, pi))))
            return DeterministicSolution(tau=tau, sigma=1.0 - tau, R=R, iterations=it,
                                         residual=residual, regime=regime,
                                         nonuniqueness_risk=risk)
    residual = float(np.max(np.abs(tau - limit_infection_probability(tau + zeta, mu, pi))))
    raise ConvergenceError("attack-rate iteration did not converge", tau, residual)


def compute_R(mu: np.ndarray, pi: np.ndarray, tol: float = 1e-14,
              max_iter: int = 100_000) -> float:
    """Spectral radius of M Pi by power iteration.

    The iteration runs on the nonnegative matrix A = mu @ diag(pi) with a
    fresh restart if an iterate hits zero (possible for nilpotent patterns,
    where the radius genuinely is 0).  If the eigenvalue estimates cycle
    without settling (periodic nonzero patterns), falls back to a dense
    eigendecomposition of A + eps*I with eps = 1e-12 and reports the shift.
    """
    mu = np.asarray(mu, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if np.any(mu < 0):
        raise ValueError("mu must be nonnegative")
    A = mu * pi[None, :]
    m = A.shape[0]
    if not A.any():
        return 0.0

    x = np.full(m, 1.0 / m)
    estimate = None
    restarted = False
    for _ in range(max_iter):
        y = x @ A
        total = y.sum()
        if total == 0.0:
            if restarted:
                return 0.0
            # restart once from a tilted positive vector; a second zero from a
            # strictly positive start means A is nilpotent and the radius is 0
            x = np.arange(1, m + 1, dtype=float)
            x /= x.sum()
            restarted = True
            estimate = None
            continue
        if estimate is not None and abs(total - estimate) <= tol:
            return float(total)
        estimate = total
        x = y / total

    eps = 1e-12
    warnings.warn(
        f"power iteration did not settle; using dense eigenvalues of the matrix shifted by {eps}",
        RuntimeWarning,
    )
    shifted = float(np.max(np.abs(np.linalg.eigvals(A + eps * np.eye(m)))))
    return shifted - eps


def check_irreducibility(mu: np.ndarray, pi: np.ndarray) -> bool:
    """True iff the directed type graph (edge k -> i when mu[k, i] > 0) is
    strongly connected.  Since pi > 0, this is the irreducibility of the
    transposed mean matrix scaled by Pi, which is what the uniqueness theory
    for the fixed point needs."""
    mu = np.asarray(mu, dtype=float)
    pattern = csr_matrix((mu > 0).astype(np.int8))
    n_components, _ = connected_components(pattern, directed=True, connection="strong")
    return bool(n_components == 1)
