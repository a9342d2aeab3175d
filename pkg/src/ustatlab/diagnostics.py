"""Replicated convergence experiments and identity diagnostics.

A convergence experiment simulates independent replicate paths, tracks the
U-statistic along a checkpoint grid, pairs each path with its own limit, and
aggregates two error summaries per checkpoint: the L^p error across
replicates and the maximum absolute error (the strictest finite-sample
surrogate for path-wise convergence).  Everything is deterministic given the
config; the worker count never changes results, only wall time.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import rng as _rng
from .core import EXACT_EVAL_BUDGET, ConfigurationError, InfeasibilityError, Kernel, SamplePath
from .engine import (
    PrefixSeries,
    incomplete_u_statistic,
    prefix_u_statistics,
    sample_increasing_tuples,
    trailing_pair_average,
    truncate_kernel,
    u_statistic,
)
from .kernels import KernelSpec, build_kernel
from .limits import (
    LimitEstimate,
    component_law_for_path,
    estimate_limit,
    lp_error_curve,
    mixture_component_models,
)
from .processes import Mixture, ProcessSpec, simulate

__all__ = [
    "ExperimentConfig",
    "ComponentCluster",
    "ConvergenceReport",
    "convergence_experiment",
    "indicator_convergence_experiment",
    "reconstruction_identity_check",
    "tail_mass_diagnostic",
    "resolve_worker_count",
]


def resolve_worker_count() -> int:
    """Worker count from UST_THREADS (0 or unset means auto)."""
    raw = os.environ.get("UST_THREADS", "0")
    try:
        requested = int(raw)
    except ValueError:
        raise ConfigurationError(f"UST_THREADS must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ConfigurationError(f"UST_THREADS must be >= 0, got {requested}")
    if requested == 0:
        return min(os.cpu_count() or 1, 8)
    return requested


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one replicated convergence experiment."""

    process: ProcessSpec
    kernel: KernelSpec
    checkpoints: tuple[int, ...]
    replicates: int = 1
    p: float = 1.0
    mode: str = "exact"
    samples: Optional[int] = None
    truncation: Optional[float] = None
    master_seed: int = 0
    limit_samples: int = 100_000

    def __post_init__(self):
        cps = tuple(int(c) for c in self.checkpoints)
        if not cps:
            raise ConfigurationError("experiment.checkpoints must be non-empty")
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ConfigurationError(f"experiment.checkpoints must be strictly increasing, got {list(cps)}")
        object.__setattr__(self, "checkpoints", cps)
        if self.replicates < 1:
            raise ConfigurationError(f"experiment.replicates must be >= 1, got {self.replicates}")
        if self.p < 1:
            raise ConfigurationError(f"experiment.p must be >= 1, got {self.p}")
        if self.mode not in ("exact", "incomplete"):
            raise ConfigurationError(f"experiment.mode must be 'exact' or 'incomplete', got {self.mode!r}")
        if self.mode == "incomplete" and (self.samples is None or self.samples < 1):
            raise ConfigurationError("experiment.samples must be >= 1 in incomplete mode")
        if self.truncation is not None and not self.truncation > 0:
            raise ConfigurationError(f"experiment.truncation must be positive, got {self.truncation}")
        if self.limit_samples < 2:
            raise ConfigurationError(f"experiment.limit_samples must be >= 2, got {self.limit_samples}")

    @property
    def n(self) -> int:
        return self.checkpoints[-1]


@dataclasses.dataclass(frozen=True)
class ComponentCluster:
    """Terminal-value summary for one mixture component."""

    component: int
    weight: float
    limit_value: float
    count: int
    mean_terminal_u: float


@dataclasses.dataclass(frozen=True)
class ConvergenceReport:
    """Per-replicate series and limits plus aggregated error summaries."""

    checkpoints: tuple[int, ...]
    u_values: np.ndarray  # (replicates, checkpoints)
    limits: tuple[LimitEstimate, ...]
    latent_components: tuple[Optional[int], ...]
    p: float
    lp_errors: np.ndarray
    max_abs_errors: np.ndarray
    clusters: Optional[tuple[ComponentCluster, ...]]
    cluster_agreement: Optional[float]
    notes: tuple[str, ...]
    kernel_name: str
    process_id: str
    mode: str
    master_seed: int

    @property
    def replicates(self) -> int:
        return self.u_values.shape[0]

    def series(self, r: int) -> PrefixSeries:
        return PrefixSeries(self.checkpoints, self.u_values[r])

    def terminal_values(self) -> np.ndarray:
        return self.u_values[:, -1]


def _validate_feasible(cfg: ExperimentConfig, kernel: Kernel) -> None:
    n, m = cfg.n, kernel.order
    if cfg.checkpoints[0] < m:
        raise ConfigurationError(
            f"experiment.checkpoints must be >= the kernel order {m}, got {cfg.checkpoints[0]}"
        )
    if cfg.mode == "exact" and math.comb(n, m) > EXACT_EVAL_BUDGET:
        raise InfeasibilityError(
            f"exact mode needs binom({n}, {m}) = {math.comb(n, m)} kernel evaluations "
            f"(budget {EXACT_EVAL_BUDGET}); switch to incomplete mode with a sample count"
        )


def _replicate_series(cfg: ExperimentConfig, kernel: Kernel, path: SamplePath, r: int) -> PrefixSeries:
    if cfg.mode == "exact":
        return prefix_u_statistics(path, kernel, cfg.checkpoints)
    values = [
        incomplete_u_statistic(
            path.prefix(c),
            kernel,
            cfg.samples,
            _rng.derive_seed(cfg.master_seed, _rng.TUPLES, r, ci),
        )
        for ci, c in enumerate(cfg.checkpoints)
    ]
    return PrefixSeries(cfg.checkpoints, np.asarray(values))


def _run_replicate(cfg: ExperimentConfig, kernel: Kernel, r: int):
    path = simulate(cfg.process, cfg.n, _rng.derive_seed(cfg.master_seed, _rng.PATH, r))
    series = _replicate_series(cfg, kernel, path, r)
    model = component_law_for_path(cfg.process, path)
    limit = estimate_limit(model, kernel, cfg.limit_samples, _rng.derive_seed(cfg.master_seed, _rng.MC, r))
    return series, limit, path.latent_component


def _cluster_summary(cfg: ExperimentConfig, kernel: Kernel, terminal: np.ndarray, latent: Sequence[int]):
    spec = cfg.process
    component_limits = [
        estimate_limit(m, kernel, cfg.limit_samples, _rng.derive_seed(cfg.master_seed, _rng.MC, -1, m.component_index))
        for m in mixture_component_models(spec)
    ]
    latent_arr = np.asarray(latent, dtype=np.int64)
    clusters = []
    for i, (w, lim) in enumerate(zip(spec.weights, component_limits)):
        mask = latent_arr == i
        clusters.append(
            ComponentCluster(
                component=i,
                weight=w,
                limit_value=lim.value,
                count=int(np.sum(mask)),
                mean_terminal_u=float(np.mean(terminal[mask])) if np.any(mask) else math.nan,
            )
        )
    limit_values = np.asarray([c.limit_value for c in clusters])
    assigned = np.argmin(np.abs(terminal[:, None] - limit_values[None, :]), axis=1)
    agreement = float(np.mean(assigned == latent_arr))
    return tuple(clusters), agreement


def convergence_experiment(cfg: ExperimentConfig) -> ConvergenceReport:
    """Run the replicated experiment described by ``cfg``.

    Per replicate: simulate a path from a replicate-keyed seed, track the
    (optionally clamped) kernel's U-statistic along the checkpoints, and
    estimate the path's own limit.  Replicates run in parallel when
    UST_THREADS allows; aggregation order is fixed by replicate index, so
    reports are bit-identical for any worker count.
    """
    kernel = build_kernel(cfg.kernel)
    if cfg.truncation is not None:
        kernel = truncate_kernel(kernel, cfg.truncation)
    _validate_feasible(cfg, kernel)

    workers = resolve_worker_count()
    indices = range(cfg.replicates)
    if workers > 1 and cfg.replicates > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: _run_replicate(cfg, kernel, r), indices))
    else:
        results = [_run_replicate(cfg, kernel, r) for r in indices]

    series = [res[0] for res in results]
    limits = tuple(res[1] for res in results)
    latent = tuple(res[2] for res in results)
    u_values = np.stack([s.values for s in series])
    limit_values = np.asarray([est.value for est in limits])
    errors = np.abs(u_values - limit_values[:, None])
    lp = lp_error_curve(series, limit_values, cfg.p)

    clusters = agreement = None
    if isinstance(cfg.process, Mixture):
        clusters, agreement = _cluster_summary(cfg, kernel, u_values[:, -1], latent)

    notes = []
    if kernel.order >= 3 and not kernel.symmetric:
        notes.append(
            f"order-{kernel.order} kernel without symmetry: no convergence guarantee (open question)"
        )

    return ConvergenceReport(
        checkpoints=cfg.checkpoints,
        u_values=u_values,
        limits=limits,
        latent_components=latent,
        p=cfg.p,
        lp_errors=lp,
        max_abs_errors=np.max(errors, axis=0),
        clusters=clusters,
        cluster_agreement=agreement,
        notes=tuple(notes),
        kernel_name=kernel.name,
        process_id=str(cfg.process),
        mode=cfg.mode,
        master_seed=cfg.master_seed,
    )


def indicator_convergence_experiment(cfg: ExperimentConfig) -> ConvergenceReport:
    """Convergence experiment whose limits come from exact box probabilities.

    Requires an indicator-product kernel and a process whose component laws
    have closed-form box probabilities, so every limit has zero standard
    error and error tolerances are sharp.
    """
    kernel = build_kernel(cfg.kernel)
    if "boxes" not in kernel.params:
        raise ConfigurationError("indicator_convergence_experiment needs an indicator-product kernel")
    if cfg.truncation is not None:
        raise ConfigurationError("truncation is pointless for indicator kernels (already bounded by 1)")
    report = convergence_experiment(cfg)
    bad = [est.method for est in report.limits if est.method != "exact_box"]
    if bad:
        raise ConfigurationError(
            f"component laws lack closed-form box probabilities (got methods {sorted(set(bad))})"
        )
    return report


def reconstruction_identity_check(
    path: SamplePath,
    kernel2: Kernel,
    level: float,
    rel_tol: float = 1e-12,
) -> bool:
    """Verify the weighted reconstruction of the order-2 clamped U-statistic.

    Rebuilds U_{2,n} of the clamped kernel as (1/binom(n,2)) sum_j j * d_j,
    where d_j averages the clamped kernel against observation j, and checks
    agreement with the direct evaluation to ``rel_tol`` relative tolerance.
    """
    n = len(path)
    if n < 2:
        raise ValueError("a path of length >= 2 is required")
    clamped = truncate_kernel(kernel2, level)
    rebuilt = math.fsum(j * trailing_pair_average(path, clamped, j) for j in range(2, n + 1))
    rebuilt /= math.comb(n, 2)
    direct = u_statistic(path, clamped)
    return abs(rebuilt - direct) <= rel_tol * max(1.0, abs(direct))


def tail_mass_diagnostic(
    path: SamplePath,
    kernel: Kernel,
    p: float,
    levels: Sequence[float],
    max_tuples: int = 200_000,
    seed: int = 0,
) -> list[tuple[float, float]]:
    """Empirical tail mass of |h|^p over index tuples, per threshold.

    For each level R reports the average of |h|^p 1{|h| > R} over evaluated
    tuples (all of them when feasible, otherwise a uniform subsample).
    Decreasing in R by construction; advisory only, this does not certify
    uniform integrability.
    """
    n, m = len(path), kernel.order
    if n < m:
        raise ValueError(f"path length {n} is smaller than the kernel order {m}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if math.comb(n, m) <= max_tuples:
        idx = np.asarray(list(itertools.combinations(range(n), m)), dtype=np.int64)
    else:
        idx = sample_increasing_tuples(_rng.generator(seed, _rng.TUPLES), n, m, max_tuples)
    magnitudes = np.abs(kernel.eval_tuples(path.points[idx]))
    powered = magnitudes**p
    return [(float(r), float(np.mean(powered * (magnitudes > r)))) for r in levels]
