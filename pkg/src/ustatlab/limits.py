"""The random limit of a U-statistic and its estimation.

For a stationary (possibly non-ergodic) sequence the U-statistic converges
to the kernel integrated against the m-fold product of the conditional
marginal law given the invariant information of the path.  For synthetic
mixtures that law is the active component's marginal law, so the limit is
computable per path: in closed form when the kernel exposes a hook for the
model, exactly from box probabilities for indicator-type kernels, and by
Monte Carlo over independent m-tuples otherwise.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional, Sequence

import numpy as np

from . import rng as _rng
from .core import Kernel, SamplePath
from .engine import PrefixSeries
from .processes import Mixture, ProcessSpec, marginal_law

__all__ = [
    "RandomMeasureModel",
    "LimitEstimate",
    "component_law_for_path",
    "mixture_component_models",
    "split_sample_model",
    "estimate_limit",
    "lp_error_curve",
]

_MC_CHUNK = 1 << 16


@dataclasses.dataclass(frozen=True)
class RandomMeasureModel:
    """A samplable stand-in for the conditional marginal law of one path."""

    law: object
    component_index: int = 0
    description: str = ""

    def sample_tuples(self, gen: np.random.Generator, count: int, order: int) -> np.ndarray:
        """Draw ``count`` independent m-tuples of iid points: a (count, m, d) array."""
        return self.law.sample(gen, (count, order))


@dataclasses.dataclass(frozen=True)
class LimitEstimate:
    """A limit value with its estimation method; std_error is 0 unless Monte Carlo."""

    value: float
    std_error: float
    method: str

    def __post_init__(self):
        if self.method not in ("analytic", "exact_box", "monte_carlo"):
            raise ValueError(f"unknown limit method {self.method!r}")
        if self.method != "monte_carlo" and self.std_error != 0.0:
            raise ValueError("std_error must be 0 for closed-form methods")


def component_law_for_path(spec: ProcessSpec, path: SamplePath) -> RandomMeasureModel:
    """The conditional marginal law active on a path.

    For a mixture this is the latent component's marginal law (the path must
    carry its latent index); for ergodic specs it is the marginal law itself.
    """
    if isinstance(spec, Mixture):
        if path.latent_component is None:
            raise ValueError("a mixture path must carry its latent component index")
        idx = path.latent_component
        if not 0 <= idx < len(spec.components):
            raise ValueError(f"latent component {idx} is out of range for {len(spec.components)} components")
        law = marginal_law(spec.components[idx])
        return RandomMeasureModel(law, component_index=idx, description=f"component {idx}: {law}")
    law = marginal_law(spec)
    return RandomMeasureModel(law, component_index=0, description=str(law))


def mixture_component_models(spec: Mixture) -> list[RandomMeasureModel]:
    """One model per mixture component, in component order."""
    return [
        RandomMeasureModel(marginal_law(c), component_index=i, description=f"component {i}: {marginal_law(c)}")
        for i, c in enumerate(spec.components)
    ]


def split_sample_model(path: SamplePath, fraction: float = 0.5) -> RandomMeasureModel:
    """Heuristic plug-in law for ingested data with unknown decomposition.

    Builds an empirical law from the leading fraction of the path; the
    remaining observations can then be scored against limits estimated from
    it.  This is a heuristic, not an estimate of the ergodic decomposition:
    a single path only ever exposes one component.
    """
    from .processes import EmpiricalLaw

    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    head = max(1, int(len(path) * fraction))
    return RandomMeasureModel(
        EmpiricalLaw(path.points[:head]),
        component_index=0,
        description=f"heuristic split-sample law from the first {head} observations",
    )


def estimate_limit(
    model: RandomMeasureModel,
    kernel: Kernel,
    mc_samples: int = 100_000,
    seed: int = 0,
) -> LimitEstimate:
    """The kernel integrated against the m-fold product of the model's law.

    Uses the kernel's closed-form hook when it applies to this model;
    otherwise averages the kernel over ``mc_samples`` independent m-tuples
    drawn iid from the law (the product measure, not consecutive path
    points) and reports the standard error of the mean.
    """
    if kernel.analytic_limit is not None:
        value = kernel.analytic_limit(model)
        if value is not None:
            return LimitEstimate(float(value), 0.0, kernel.limit_method)
    if mc_samples < 2:
        raise ValueError(f"mc_samples must be >= 2 for Monte Carlo estimation, got {mc_samples}")
    gen = _rng.generator(seed, _rng.MC)
    total = 0.0
    total_sq = 0.0
    remaining = mc_samples
    while remaining > 0:
        count = min(remaining, _MC_CHUNK)
        values = kernel.eval_tuples(model.sample_tuples(gen, count, kernel.order))
        total += float(np.sum(values))
        total_sq += float(np.sum(values * values))
        remaining -= count
    mean = total / mc_samples
    var = max(total_sq / mc_samples - mean * mean, 0.0) * mc_samples / (mc_samples - 1)
    return LimitEstimate(mean, math.sqrt(var / mc_samples), "monte_carlo")


def lp_error_curve(series: Sequence[PrefixSeries], limits: Sequence[float], p: float = 1.0) -> np.ndarray:
    """Per-checkpoint L^p distance between U-statistic series and their limits.

    Entry k is (mean over replicates of |U_r(n_k) - limit_r|^p)^(1/p).  All
    series must share one checkpoint grid, one limit per series; p >= 1.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if len(series) != len(limits):
        raise ValueError(f"got {len(series)} series but {len(limits)} limits")
    if not series:
        raise ValueError("at least one replicate is required")
    grid = series[0].checkpoints
    if any(s.checkpoints != grid for s in series):
        raise ValueError("all series must share the same checkpoints")
    values = np.stack([s.values for s in series])
    errors = np.abs(values - np.asarray(limits, dtype=np.float64)[:, None])
    return np.mean(errors**p, axis=0) ** (1.0 / p)
