"""Exact generational simulation of the multitype final size.

One generation works like this: every active infective of type i draws its
infectivity vector V_i once; a remaining type-k susceptible then escapes
the whole generation with probability prod(1 - V_{.,k}) over all active
infectives, independently of other susceptibles.  The number of new type-k
infections is therefore Binomial(S_k, 1 - prod(1 - V_{.,k})), which is the
same distribution the per-individual indicator construction produces, at a
cost of m binomials per generation instead of one per infective.  The
literal indicator construction is kept in ``counting_indicators`` for
property tests.

Replicates are embarrassingly parallel: each owns a counter-based RNG
stream keyed by (base seed, replicate index), so ensembles are reproducible
bit-for-bit regardless of worker count.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from math import expm1, log1p
from typing import Optional, Sequence

import numpy as np

from .kernel import Allocation, InfectivityKernel, PopulationSpec, ResolvedPopulation, resolve_population

__all__ = [
    "OutbreakClass",
    "FinalSizeRecord",
    "CountingSnapshot",
    "default_threshold",
    "classify_outbreak",
    "run_final_size",
    "run_ensemble",
    "replicate_rng",
    "counting_indicators",
    "evaluate_counting_process",
]


class OutbreakClass(str, enum.Enum):
    MAJOR = "major"
    MINOR = "minor"


@dataclass(frozen=True)
class FinalSizeRecord:
    """Final size of one epidemic realization.

    ``t_inf`` counts infections among the initially susceptible only,
    ``generations`` is the index of the last generation that produced a new
    infection (0 if the seeds infected nobody).
    """

    t_inf: np.ndarray
    generations: int
    outbreak_class: OutbreakClass
    population: ResolvedPopulation
    replicate: int = 0
    seed: Optional[int] = None

    @property
    def total(self) -> int:
        return int(self.t_inf.sum())


def default_threshold(n_susceptible: int) -> int:
    """Major/minor cut: ceil(N^(3/4)), between O(1) minor progeny and O(N) outbreaks."""
    return int(math.ceil(n_susceptible ** 0.75))


def classify_outbreak(record: FinalSizeRecord, threshold: int) -> OutbreakClass:
    """Major iff the total final size reaches the threshold (ties count as major)."""
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    return OutbreakClass.MAJOR if record.total >= threshold else OutbreakClass.MINOR


def run_final_size(spec: PopulationSpec, kernel: InfectivityKernel,
                   rng: np.random.Generator, threshold: Optional[int] = None,
                   replicate: int = 0, seed: Optional[int] = None) -> FinalSizeRecord:
    """Run one epidemic to extinction and return its final size record."""
    if kernel.m != spec.m:
        raise ValueError(f"kernel has {kernel.m} types but population has {spec.m}")
    pop = resolve_population(spec, rng)
    m = spec.m
    N = spec.N
    susceptible = pop.n_susceptible.astype(np.int64).copy()
    active = pop.n_infective.astype(np.int64).copy()
    t_inf = np.zeros(m, dtype=np.int64)
    generations = 0
    # cannot be exceeded; guards an infinite loop caused by a bug
    generation_cap = N + int(active.sum()) + 1

    if kernel.deterministic and m == 1:
        # scalar fast path: one escape exponent and one binomial per generation
        v = float(kernel.sample(0, N, rng)[0])
        unit = log1p(-v) if v < 1.0 else -math.inf
        s, n_active, infected = int(susceptible[0]), int(active[0]), 0
        while n_active > 0:
            new = int(rng.binomial(s, -expm1(n_active * unit)))
            if new == 0:
                break
            infected += new
            s -= new
            n_active = new
            generations += 1
            if generations > generation_cap:
                raise RuntimeError("generation count exceeded the population size; simulator bug")
        t_inf[0] = infected
        susceptible[0] = s
        active[0] = 0

    fixed_log_escape = None
    if kernel.deterministic and m > 1:
        # V is a fixed vector per type; hoist the per-infective escape terms
        with np.errstate(divide="ignore"):
            fixed_log_escape = np.stack([np.log1p(-kernel.sample(i, N, rng))
                                         for i in range(m)])

    while active.any():
        if fixed_log_escape is not None:
            idx = np.nonzero(active)[0]  # skip zero rows: 0 * -inf is nan
            log_escape = active[idx] @ fixed_log_escape[idx]
        else:
            log_escape = np.zeros(m)
            with np.errstate(divide="ignore"):
                for i in np.nonzero(active)[0]:
                    v = kernel.sample(int(i), N, rng, size=int(active[i]))  # (n_i, m)
                    log_escape += np.log1p(-v).sum(axis=0)
        p_infect = -np.expm1(log_escape)
        new = rng.binomial(susceptible, p_infect)
        if not new.any():
            break
        t_inf += new
        susceptible -= new
        active = new
        generations += 1
        if generations > generation_cap:
            raise RuntimeError("generation count exceeded the population size; simulator bug")

    threshold = default_threshold(pop.total_susceptible) if threshold is None else threshold
    record = FinalSizeRecord(t_inf=t_inf, generations=generations,
                             outbreak_class=OutbreakClass.MINOR, population=pop,
                             replicate=replicate, seed=seed)
    return replace(record, outbreak_class=classify_outbreak(record, threshold))


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one replicate, keyed by (base seed, index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def run_ensemble(spec: PopulationSpec, kernel: InfectivityKernel, replicates: int,
                 seed: int, workers: int = 1,
                 threshold: Optional[int] = None) -> list[FinalSizeRecord]:
    """Run an ensemble of independent replicates.

    Replicate r always uses the stream derived from (seed, r), so the output
    is identical for any worker count; records come back ordered by
    replicate index.
    """
    if replicates < 1:
        raise ValueError(f"need at least 1 replicate, got {replicates}")

    def one(r: int) -> FinalSizeRecord:
        return run_final_size(spec, kernel, replicate_rng(seed, r),
                              threshold=threshold, replicate=r, seed=seed)

    if workers <= 1:
        return [one(r) for r in range(replicates)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(replicates)))


# ---------------------------------------------------------------------------
# Literal counting-process construction (slow path, used by property tests)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountingSnapshot:
    """X(t): how many initial susceptibles of each type the first
    floor(t_k * N * pi_k) infectives of each type k would infect."""

    t: np.ndarray
    x: np.ndarray


def _exposure_counts(spec: PopulationSpec, t: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(t, dtype=float) * spec.N * spec.pi).astype(np.int64)


def counting_indicators(spec: PopulationSpec, kernel: InfectivityKernel,
                        exposure_levels: Sequence[np.ndarray],
                        rng: np.random.Generator) -> list[list[np.ndarray]]:
    """Materialize the per-individual infection indicators for one realization.

    Returns ``chi`` with ``chi[level][i]`` a boolean array over the type-i
    initial susceptibles (deterministic population split).  All levels share
    the same underlying contact draws, so nested exposure levels produce
    nested infection sets.
    """
    pop = resolve_population(spec, None if spec.allocation is Allocation.DETERMINISTIC else rng)
    levels = [np.asarray(t, dtype=float) for t in exposure_levels]
    counts = [_exposure_counts(spec, t) for t in levels]
    available = pop.n_infective + pop.n_susceptible
    for t, c in zip(levels, counts):
        if np.any(c > available):
            raise ValueError(
                f"exposure level {t} asks for {c} infectives but only {available} are available")
    max_exposure = np.maximum.reduce(counts) if counts else np.zeros(spec.m, dtype=np.int64)

    # draw every infectivity vector once, then independent contact coins per
    # (infective, susceptible) pair
    contacts: list[list[np.ndarray]] = []  # contacts[k][i]: (L_k, N_i) booleans
    for k in range(spec.m):
        L_k = int(max_exposure[k])
        if L_k > 0:
            v = kernel.sample(k, spec.N, rng, size=L_k)  # (L_k, m)
        else:
            v = np.zeros((0, spec.m))
        contacts.append([
            rng.random((L_k, int(pop.n_susceptible[i]))) < v[:, i][:, None]
            for i in range(spec.m)
        ])

    chi: list[list[np.ndarray]] = []
    for c in counts:
        level_chi = []
        for i in range(spec.m):
            hit = np.zeros(int(pop.n_susceptible[i]), dtype=bool)
            for k in range(spec.m):
                if c[k] > 0:
                    hit |= contacts[k][i][: int(c[k])].any(axis=0)
            level_chi.append(hit)
        chi.append(level_chi)
    return chi


def evaluate_counting_process(spec: PopulationSpec, kernel: InfectivityKernel,
                              exposure_levels: Sequence[np.ndarray],
                              rng: np.random.Generator) -> list[CountingSnapshot]:
    """Evaluate X(t) at each requested exposure level for one realization."""
    chi = counting_indicators(spec, kernel, exposure_levels, rng)
    return [
        CountingSnapshot(t=np.asarray(t, dtype=float),
                         x=np.array([int(level[i].sum()) for i in range(spec.m)]))
        for t, level in zip(exposure_levels, chi)
    ]
