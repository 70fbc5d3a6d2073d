"""Small scalar distribution helper used by kernel builders and configs.

Kernel specifications need a handful of nonnegative scalar laws (contact
probabilities W, infectious lifetimes Q, group sojourn times I).  Each law
must expose sampling, exact first and second moments, and, when available,
a closed-form moment generating function evaluated at nonpositive
arguments (that is all the extinction solver ever needs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = ["ScalarDist"]


@dataclass(frozen=True)
class ScalarDist:
    """A nonnegative scalar random variable with known moments.

    ``mgf`` is ``None`` when no closed form is available (the caller falls
    back to Monte Carlo); when present it must accept any t <= 0.
    """

    name: str
    mean: float
    var: float
    sample: Callable[[np.random.Generator, int], np.ndarray] = field(repr=False)
    mgf: Optional[Callable[[float], float]] = field(default=None, repr=False)
    support_max: float = np.inf

    @property
    def is_constant(self) -> bool:
        return self.var == 0.0

    @staticmethod
    def constant(value: float) -> "ScalarDist":
        v = float(value)
        if v < 0:
            raise ValueError(f"constant distribution needs value >= 0, got {v}")
        return ScalarDist(
            name=f"constant({v})",
            mean=v,
            var=0.0,
            sample=lambda rng, size: np.full(size, v),
            mgf=lambda t: float(np.exp(t * v)),
            support_max=v,
        )

    @staticmethod
    def exponential(mean: float) -> "ScalarDist":
        m = float(mean)
        if m <= 0:
            raise ValueError(f"exponential distribution needs mean > 0, got {m}")
        return ScalarDist(
            name=f"exponential(mean={m})",
            mean=m,
            var=m * m,
            sample=lambda rng, size: rng.exponential(m, size),
            mgf=lambda t: 1.0 / (1.0 - m * t),  # finite for all t < 1/m
        )

    @staticmethod
    def gamma(shape: float, scale: float) -> "ScalarDist":
        k, s = float(shape), float(scale)
        if k <= 0 or s <= 0:
            raise ValueError("gamma distribution needs shape > 0 and scale > 0")
        return ScalarDist(
            name=f"gamma(shape={k}, scale={s})",
            mean=k * s,
            var=k * s * s,
            sample=lambda rng, size: rng.gamma(k, s, size),
            mgf=lambda t: float((1.0 - s * t) ** (-k)),
        )

    @staticmethod
    def bernoulli(p: float) -> "ScalarDist":
        pp = float(p)
        if not 0 <= pp <= 1:
            raise ValueError(f"bernoulli distribution needs p in [0,1], got {pp}")
        return ScalarDist(
            name=f"bernoulli({pp})",
            mean=pp,
            var=pp * (1 - pp),
            sample=lambda rng, size: (rng.random(size) < pp).astype(float),
            mgf=lambda t: float(1 - pp + pp * np.exp(t)),
            support_max=1.0 if pp > 0 else 0.0,
        )

    @staticmethod
    def uniform(low: float, high: float) -> "ScalarDist":
        a, b = float(low), float(high)
        if not 0 <= a < b:
            raise ValueError(f"uniform distribution needs 0 <= low < high, got [{a}, {b}]")

        def _mgf(t: float) -> float:
            if t == 0.0:
                return 1.0
            return float((np.exp(t * b) - np.exp(t * a)) / (t * (b - a)))

        return ScalarDist(
            name=f"uniform({a}, {b})",
            mean=(a + b) / 2,
            var=(b - a) ** 2 / 12,
            sample=lambda rng, size: rng.uniform(a, b, size),
            mgf=_mgf,
            support_max=b,
        )

    @staticmethod
    def beta(a: float, b: float) -> "ScalarDist":
        # No elementary MGF; extinction solvers use the Monte Carlo path.
        aa, bb = float(a), float(b)
        if aa <= 0 or bb <= 0:
            raise ValueError("beta distribution needs a > 0 and b > 0")
        mean = aa / (aa + bb)
        var = aa * bb / ((aa + bb) ** 2 * (aa + bb + 1))
        return ScalarDist(
            name=f"beta({aa}, {bb})",
            mean=mean,
            var=var,
            sample=lambda rng, size: rng.beta(aa, bb, size),
            mgf=None,
            support_max=1.0,
        )

    @staticmethod
    def discrete(values, probs) -> "ScalarDist":
        vals = np.asarray(values, dtype=float)
        ps = np.asarray(probs, dtype=float)
        if vals.ndim != 1 or vals.shape != ps.shape:
            raise ValueError("discrete distribution needs matching 1-d values and probs")
        if np.any(vals < 0) or np.any(ps < 0) or abs(ps.sum() - 1.0) > 1e-12:
            raise ValueError("discrete distribution needs values >= 0 and probs summing to 1")
        mean = float(vals @ ps)
        var = float((vals - mean) ** 2 @ ps)
        return ScalarDist(
            name=f"discrete({vals.tolist()})",
            mean=mean,
            var=var,
            sample=lambda rng, size: rng.choice(vals, size=size, p=ps),
            mgf=lambda t: float(np.exp(t * vals) @ ps),
            support_max=float(vals.max()) if vals.size else 0.0,
        )

    @staticmethod
    def from_config(cfg: dict) -> "ScalarDist":
        """Build from the {"dist": ..., ...} tagged form used in experiment configs."""
        if not isinstance(cfg, dict) or "dist" not in cfg:
            raise ValueError(f"scalar distribution config must be a dict with a 'dist' key: {cfg!r}")
        kind = cfg["dist"]
        try:
            if kind == "constant":
                return ScalarDist.constant(cfg["value"])
            if kind == "exponential":
                return ScalarDist.exponential(cfg["mean"])
            if kind == "gamma":
                return ScalarDist.gamma(cfg["shape"], cfg["scale"])
            if kind == "bernoulli":
                return ScalarDist.bernoulli(cfg["p"])
            if kind == "uniform":
                return ScalarDist.uniform(cfg["low"], cfg["high"])
            if kind == "beta":
                return ScalarDist.beta(cfg["a"], cfg["b"])
            if kind == "discrete":
                return ScalarDist.discrete(cfg["values"], cfg["probs"])
        except KeyError as exc:
            raise ValueError(f"scalar distribution {kind!r} is missing parameter {exc}") from exc
        raise ValueError(f"unknown scalar distribution kind {kind!r}")
