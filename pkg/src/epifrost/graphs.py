"""Random-graph and mobility front-ends compiled into infectivity kernels.

Each builder maps a structured model onto the generic kernel contract:

  * static Bernoulli graph: edge between a type-i and type-j vertex with
    probability alpha_ij / N, contact probability W along each edge, so
    V_{i,j} = alpha_ij W_{i,j} / N;
  * mixed Bernoulli graph: per-individual connectivity D with finite
    support theta and P(D = theta_j) = pi_j, acquaintance probability
    proportional to D_k D_l, one contact coin W per infective, so
    V_{i,j} = theta_i theta_j W / N and types must be allocated at random;
  * dynamic Bernoulli graph: partnerships form at rate rho_plus/N and
    dissolve at rate rho_minus, contacts fire at rate beta while partnered
    and infectious (lifetime Q_i), yielding the closed-form per-partner
    infection probability ``_dynamic_scaled_u`` below;
  * mover model: an infective originating in group i spends I^i_j time
    units in group j and contacts group-k individuals at rate b[i][k,j]/N
    while there, so V_{i,k} = 1 - exp(-(1/N) sum_j b[i][k,j] I^i_j);
  * random-type model: an individual picks its infective type at random
    from pi on infection, independent of the infector.

The graph itself is never materialized: edge independence lets the graph
and epidemic be constructed in unison, which is exactly what the kernel
sampler encodes.  Prescribed-degree and scale-free graphs are out of scope
(they break edge independence).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .deterministic import check_irreducibility
from .distributions import ScalarDist
from .kernel import Allocation, InfectivityKernel, MomentSummary, moments_from_u_sampler

__all__ = [
    "StaticGraphSpec",
    "MixedGraphSpec",
    "DynamicGraphSpec",
    "BallClancy93Spec",
    "static_bernoulli_kernel",
    "mixed_bernoulli_kernel",
    "dynamic_bernoulli_kernel",
    "ball_clancy93_kernel",
    "ball_clancy95_model",
]


# ---------------------------------------------------------------------------
# Static multitype Bernoulli graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StaticGraphSpec:
    """Edge intensities alpha (symmetric, irreducible pattern) and the
    per-edge contact probability law W.

    ``w_mode`` controls dependence within one infective's row: "independent"
    draws a fresh W per target type, "shared" reuses a single draw.
    """

    alpha: np.ndarray
    w: ScalarDist
    w_mode: str = "independent"

    def __post_init__(self):
        alpha = np.atleast_2d(np.asarray(self.alpha, dtype=float))
        object.__setattr__(self, "alpha", alpha)
        m = alpha.shape[0]
        if alpha.shape != (m, m) or np.any(alpha < 0):
            raise ValueError("alpha must be a nonnegative square matrix")
        if not np.allclose(alpha, alpha.T, atol=1e-12):
            raise ValueError("alpha must be symmetric (acquaintance is undirected)")
        if not check_irreducibility(alpha, np.full(m, 1.0 / m)):
            raise ValueError("alpha's nonzero pattern must be irreducible (connected graph)")
        if self.w_mode not in ("independent", "shared"):
            raise ValueError(f"w_mode must be 'independent' or 'shared', got {self.w_mode!r}")
        if self.w.support_max > 1.0:
            raise ValueError("W is a probability; its support must lie in [0, 1]")


def static_bernoulli_kernel(spec: StaticGraphSpec) -> InfectivityKernel:
    """Compile a static Bernoulli graph into a kernel: V_{i,j} = alpha_ij W / N."""
    alpha = spec.alpha
    m = alpha.shape[0]
    w = spec.w
    shared = spec.w_mode == "shared"

    mu = alpha * w.mean
    lam = np.zeros((m, m, m))
    for i in range(m):
        if shared:
            lam[i] = np.outer(alpha[i], alpha[i]) * w.var
        else:
            lam[i] = np.diag(alpha[i] ** 2) * w.var

    def u_sampler(i: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        n = 1 if size is None else size
        if shared:
            draws = w.sample(rng, n)[:, None] * alpha[i][None, :]
        else:
            draws = w.sample(rng, (n, m)) * alpha[i][None, :]
        return draws[0] if size is None else draws

    def sampler(i: int, N: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        if alpha.max() > N:
            raise ValueError(f"edge intensity {alpha.max()} exceeds population scale {N}")
        return u_sampler(i, rng, size) / N

    u_mgf = None
    if w.mgf is not None:
        w_mgf = w.mgf

        if shared:
            def u_mgf(i: int, theta: np.ndarray) -> float:
                return w_mgf(float(theta @ alpha[i]))
        else:
            def u_mgf(i: int, theta: np.ndarray) -> float:
                return float(np.prod([w_mgf(float(t * a)) for t, a in zip(theta, alpha[i])]))

    return InfectivityKernel(m=m, mu=mu, lam=lam, sampler=sampler,
                             u_sampler=u_sampler, u_mgf=u_mgf,
                             deterministic=w.is_constant)


# ---------------------------------------------------------------------------
# Mixed Bernoulli graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixedGraphSpec:
    """Finite-support connectivity D (values theta, probabilities pi) and a
    scalar contact law W, independent of D."""

    theta: np.ndarray
    pi: np.ndarray
    w: ScalarDist

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "pi", pi)
        if theta.ndim != 1 or np.any(theta < 0):
            raise ValueError("theta must be a nonnegative vector")
        if pi.shape != theta.shape or np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("pi must be a strictly positive probability vector matching theta")
        if self.w.support_max > 1.0:
            raise ValueError("W is a probability; its support must lie in [0, 1]")


def mixed_bernoulli_kernel(spec: MixedGraphSpec) -> tuple[InfectivityKernel, Allocation]:
    """Compile a mixed Bernoulli graph: V_{i,j} = theta_i theta_j W / N with a
    single W per infective.

    Types are degree classes drawn independently per individual, so the
    population must use random multinomial allocation; the forced mode is
    returned alongside the kernel.
    """
    theta = spec.theta
    m = len(theta)
    w = spec.w

    mu = np.outer(theta, theta) * w.mean
    lam = np.zeros((m, m, m))
    for i in range(m):
        lam[i] = theta[i] ** 2 * np.outer(theta, theta) * w.var

    def u_sampler(i: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        n = 1 if size is None else size
        draws = w.sample(rng, n)[:, None] * (theta[i] * theta)[None, :]
        return draws[0] if size is None else draws

    def sampler(i: int, N: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        if theta.max() ** 2 > N:
            raise ValueError(f"connectivity product {theta.max() ** 2} exceeds population scale {N}")
        return u_sampler(i, rng, size) / N

    u_mgf = None
    if w.mgf is not None:
        w_mgf = w.mgf

        def u_mgf(i: int, theta_arg: np.ndarray) -> float:
            return w_mgf(float(theta[i] * (theta_arg @ theta)))

    kernel = InfectivityKernel(m=m, mu=mu, lam=lam, sampler=sampler,
                               u_sampler=u_sampler, u_mgf=u_mgf,
                               deterministic=w.is_constant)
    return kernel, Allocation.RANDOM_MULTINOMIAL


# ---------------------------------------------------------------------------
# Dynamic Bernoulli graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DynamicGraphSpec:
    """Partnership formation/dissolution rates, contact rates, and per-type
    infectious lifetimes for the dynamic Bernoulli graph in equilibrium."""

    rho_plus: np.ndarray
    rho_minus: np.ndarray
    beta: np.ndarray
    q: Sequence[ScalarDist]
    moment_samples: int = 100_000

    def __post_init__(self):
        rp = np.atleast_2d(np.asarray(self.rho_plus, dtype=float))
        rm = np.atleast_2d(np.asarray(self.rho_minus, dtype=float))
        beta = np.atleast_2d(np.asarray(self.beta, dtype=float))
        object.__setattr__(self, "rho_plus", rp)
        object.__setattr__(self, "rho_minus", rm)
        object.__setattr__(self, "beta", beta)
        m = rp.shape[0]
        if rp.shape != (m, m) or rm.shape != (m, m) or beta.shape != (m, m):
            raise ValueError("rho_plus, rho_minus and beta must be square matrices of equal size")
        if np.any(rp <= 0) or np.any(rm <= 0):
            raise ValueError("partnership rates must be strictly positive entrywise")
        if np.any(beta < 0):
            raise ValueError("contact rates must be nonnegative")
        if len(self.q) != m:
            raise ValueError(f"need one lifetime law per type, got {len(self.q)} for m={m}")


def _dynamic_scaled_u(spec: DynamicGraphSpec, i: int, q_values: np.ndarray) -> np.ndarray:
    """Scaled per-partner infection weight, rows of types j, given lifetimes q.

    First term: initially acquainted partners (equilibrium edge probability
    scales as rho_plus / (N rho_minus)); second term: partnerships formed
    during the infectious period.  Returns shape (len(q_values), m).
    """
    rp = spec.rho_plus[i]
    rm = spec.rho_minus[i]
    beta = spec.beta[i]
    decay = beta + rm
    frac = np.divide(beta, decay, out=np.zeros_like(beta), where=decay > 0)
    q = q_values[:, None]
    ramp = -np.expm1(-decay[None, :] * q)
    initial = (rp / rm)[None, :] * frac[None, :] * ramp
    secondary = rp[None, :] * frac[None, :] * (q - ramp / decay[None, :])
    return initial + secondary


def dynamic_bernoulli_kernel(spec: DynamicGraphSpec) -> InfectivityKernel:
    """Compile a dynamic Bernoulli graph kernel.

    Each infective of type i draws its lifetime Q_i once; the row of
    infection probabilities is then the deterministic function of Q_i
    derived from the equilibrium partnership process (components dependent
    through the shared lifetime), with the population scale entering at
    sampling time.  Moments are exact for degenerate lifetimes, otherwise
    estimated by Monte Carlo over the scaled limit law with standard errors
    recorded.
    """
    m = spec.rho_plus.shape[0]

    def u_sampler(i: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        n = 1 if size is None else size
        q = spec.q[i].sample(rng, n)
        u = _dynamic_scaled_u(spec, i, np.asarray(q, dtype=float))
        return u[0] if size is None else u

    def sampler(i: int, N: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        n = 1 if size is None else size
        q = np.asarray(spec.q[i].sample(rng, n), dtype=float)
        rp, rm, beta = spec.rho_plus[i], spec.rho_minus[i], spec.beta[i]
        alpha_eq = rp / (rp + N * rm)
        decay = beta + rm
        frac = np.divide(beta, decay, out=np.zeros_like(beta), where=decay > 0)
        ramp = -np.expm1(-decay[None, :] * q[:, None])
        v = (alpha_eq * frac)[None, :] * ramp
        v += (rp * frac / N)[None, :] * (q[:, None] - ramp / decay[None, :])
        v = np.clip(v, 0.0, 1.0)
        return v[0] if size is None else v

    all_constant = all(d.is_constant for d in spec.q)
    if all_constant:
        mu = np.stack([_dynamic_scaled_u(spec, i, np.array([spec.q[i].mean]))[0]
                       for i in range(m)])
        lam = np.zeros((m, m, m))
        summary = None
        scaled_rows = mu

        def u_mgf(i: int, theta: np.ndarray) -> float:
            return float(np.exp(theta @ scaled_rows[i]))
    else:
        summary = moments_from_u_sampler(u_sampler, m, spec.moment_samples,
                                         np.random.default_rng(12345))
        mu, lam = summary.mu, summary.lam
        u_mgf = None

    return InfectivityKernel(m=m, mu=mu, lam=lam, sampler=sampler,
                             u_sampler=u_sampler, u_mgf=u_mgf,
                             deterministic=all_constant, moment_summary=summary)


# ---------------------------------------------------------------------------
# Mover model (per-origin group sojourns)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallClancy93Spec:
    """Contact-rate matrices by origin plus the sojourn-time law.

    ``b[i]`` has entry [k, j] = rate of contacting a given group-k
    individual while an origin-i infective is in group j.  Sojourn times are
    either independent per group (``sojourn[i][j]`` a ScalarDist) or a joint
    sampler ``i_sampler(i, rng, size) -> (size, m)`` with moments estimated
    by Monte Carlo.
    """

    b: np.ndarray  # (m, m, m): b[i] = B_i
    sojourn: Optional[Sequence[Sequence[ScalarDist]]] = None
    i_sampler: Optional[Callable[[int, np.random.Generator, int], np.ndarray]] = field(
        default=None, repr=False)
    moment_samples: int = 100_000

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim == 2:
            b = b[None, :, :]
        object.__setattr__(self, "b", b)
        m = b.shape[0]
        if b.shape != (m, m, m) or np.any(b < 0):
            raise ValueError("b must be m nonnegative m x m matrices")
        if (self.sojourn is None) == (self.i_sampler is None):
            raise ValueError("provide exactly one of sojourn marginals or a joint i_sampler")
        if self.sojourn is not None:
            if len(self.sojourn) != m or any(len(row) != m for row in self.sojourn):
                raise ValueError(f"sojourn must be an {m} x {m} table of scalar laws")


def ball_clancy93_kernel(spec: BallClancy93Spec) -> InfectivityKernel:
    """Compile the mover model: V_{i,k} = 1 - exp(-(1/N) sum_j b[i][k,j] I^i_j)."""
    b = spec.b
    m = b.shape[0]

    if spec.sojourn is not None:
        tables = spec.sojourn

        def sample_i(i: int, rng: np.random.Generator, n: int) -> np.ndarray:
            return np.stack([tables[i][j].sample(rng, n) for j in range(m)], axis=1)

        deterministic = all(d.is_constant for row in tables for d in row)
        means = np.stack([[tables[i][j].mean for j in range(m)] for i in range(m)])
        variances = np.stack([[tables[i][j].var for j in range(m)] for i in range(m)])
        mu = np.einsum("ikj,ij->ik", b, means)
        lam = np.einsum("ijl,il,ikl->ijk", b, variances, b)
        summary = None

        u_mgf = None
        if all(d.mgf is not None for row in tables for d in row):
            def u_mgf(i: int, theta: np.ndarray) -> float:
                args = b[i].T @ theta  # component l: sum_k theta_k b[i][k, l]
                return float(np.prod([tables[i][l].mgf(float(args[l])) for l in range(m)]))
    else:
        joint = spec.i_sampler

        def sample_i(i: int, rng: np.random.Generator, n: int) -> np.ndarray:
            out = np.asarray(joint(i, rng, n), dtype=float)
            if out.shape != (n, m):
                raise ValueError(f"i_sampler must return shape ({n}, {m}), got {out.shape}")
            if np.any(out < 0):
                raise ValueError("sojourn times must be nonnegative")
            return out

        deterministic = False
        summary = moments_from_u_sampler(
            lambda i, rng, size: sample_i(i, rng, size) @ b[i].T,
            m, spec.moment_samples, np.random.default_rng(67890))
        mu, lam = summary.mu, summary.lam
        u_mgf = None

    def u_sampler(i: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        n = 1 if size is None else size
        u = sample_i(i, rng, n) @ b[i].T
        return u[0] if size is None else u

    def sampler(i: int, N: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        u = u_sampler(i, rng, size)
        return -np.expm1(-u / N)

    return InfectivityKernel(m=m, mu=mu, lam=lam, sampler=sampler,
                             u_sampler=u_sampler, u_mgf=u_mgf,
                             deterministic=deterministic, moment_summary=summary)


# ---------------------------------------------------------------------------
# Random-type model
# ---------------------------------------------------------------------------


def ball_clancy95_model(base: Sequence[ScalarDist],
                        pi: np.ndarray) -> tuple[InfectivityKernel, Allocation]:
    """Random-type model: an infective of type i contacts every individual
    with the same probability 1 - exp(-u_i / N), u_i drawn from base[i].

    Since an individual's type is assigned at random from pi irrespective of
    its infector, this maps onto random multinomial allocation; the forced
    mode is returned alongside the kernel.
    """
    pi = np.asarray(pi, dtype=float)
    m = len(pi)
    if len(base) != m:
        raise ValueError(f"need one scalar infectivity law per type, got {len(base)} for m={m}")
    if np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-12:
        raise ValueError("pi must be a strictly positive probability vector")

    means = np.array([d.mean for d in base])
    variances = np.array([d.var for d in base])
    mu = means[:, None] * np.ones((m, m))
    lam = variances[:, None, None] * np.ones((m, m, m))

    def u_sampler(i: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        n = 1 if size is None else size
        u = np.repeat(base[i].sample(rng, n)[:, None], m, axis=1)
        return u[0] if size is None else u

    def sampler(i: int, N: int, rng: np.random.Generator, size: Optional[int]) -> np.ndarray:
        return -np.expm1(-u_sampler(i, rng, size) / N)

    u_mgf = None
    if all(d.mgf is not None for d in base):
        def u_mgf(i: int, theta: np.ndarray) -> float:
            return base[i].mgf(float(theta.sum()))

    kernel = InfectivityKernel(m=m, mu=mu, lam=lam, sampler=sampler,
                               u_sampler=u_sampler, u_mgf=u_mgf,
                               deterministic=all(d.is_constant for d in base))
    return kernel, Allocation.RANDOM_MULTINOMIAL
