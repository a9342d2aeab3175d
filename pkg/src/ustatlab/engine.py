"""Exact and sampled computation of U- and V-statistics.

The exact summation engine enumerates increasing index tuples in blocks,
grouped by the largest index of each tuple.  Grouping by the largest index
makes prefix evaluation incremental: a series of U-statistics along growing
sample sizes costs one full enumeration of the largest prefix, not one
enumeration per checkpoint.  Block sums are combined with compensated
(Kahan) accumulation in a fixed order, so results are bit-stable regardless
of how work is scheduled.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
import math
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import rng as _rng
from .core import EXACT_EVAL_BUDGET, InfeasibilityError, Kernel, SamplePath

__all__ = [
    "PrefixSeries",
    "increasing_index_tuples",
    "u_statistic",
    "prefix_u_statistics",
    "v_statistic",
    "diagonal_sum",
    "u_from_v_decomposition",
    "incomplete_u_statistic",
    "sample_increasing_tuples",
    "truncate_value",
    "truncate_kernel",
    "binomial_weighted_average",
    "trailing_pair_average",
]

_BLOCK_ROWS = 1 << 19  # index-tuple rows materialized per block
_MAX_PREFIX_TABLE_ROWS = 30_000_000  # beyond this, fall back to the lex-order enumerator


class _KahanSum:
    """Compensated accumulator; deterministic for a fixed sequence of adds."""

    __slots__ = ("total", "_comp")

    def __init__(self):
        self.total = 0.0
        self._comp = 0.0

    def add(self, value: float) -> None:
        y = value - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t


def increasing_index_tuples(n: int, m: int) -> Iterator[tuple[int, ...]]:
    """Yield all strictly increasing m-tuples from {1, ..., n} in lexicographic order.

    Exactly binom(n, m) tuples; an empty stream when m > n.
    """
    if m < 1:
        raise ValueError(f"tuple length must be >= 1, got {m}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return itertools.combinations(range(1, n + 1), m)


@dataclasses.dataclass(frozen=True)
class PrefixSeries:
    """U-statistic values along increasing sample sizes."""

    checkpoints: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.checkpoints),):
            raise ValueError("PrefixSeries checkpoints and values must have equal length")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "checkpoints", tuple(int(c) for c in self.checkpoints))

    @property
    def final_value(self) -> float:
        return float(self.values[-1])


@functools.lru_cache(maxsize=8)
def _colex_prefix_table(n: int, r: int) -> np.ndarray:
    """All r-subsets of range(n) as a (binom(n, r), r) array in colex order.

    Colex order makes prefixes meaningful: the first binom(j, r) rows are
    exactly the subsets contained in range(j).
    """
    if r == 0:
        return np.zeros((1, 0), dtype=np.int64)
    table = np.arange(n, dtype=np.int64).reshape(-1, 1)
    for size in range(2, r + 1):
        parts = []
        for j in range(size - 1, n):
            cnt = math.comb(j, size - 1)
            part = np.empty((cnt, size), dtype=np.int64)
            part[:, : size - 1] = table[:cnt]
            part[:, size - 1] = j
            parts.append(part)
        table = np.vstack(parts) if parts else np.zeros((0, size), dtype=np.int64)
    table.flags.writeable = False
    return table


def _iter_blocks_by_max(n: int, m: int) -> Iterator[np.ndarray]:
    """Yield (B, m) arrays of 0-based increasing tuples covering range(n).

    Tuples appear grouped by their largest index, ascending; within a group
    the leading (m-1)-subsets are in colex order.
    """
    table = _colex_prefix_table(n - 1, m - 1)
    parts: list[np.ndarray] = []
    maxes: list[tuple[int, int]] = []
    pending = 0

    def flush() -> np.ndarray:
        nonlocal parts, maxes, pending
        block = np.empty((pending, m), dtype=np.int64)
        block[:, : m - 1] = np.concatenate(parts) if len(parts) > 1 else parts[0]
        block[:, m - 1] = np.repeat(
            np.asarray([j for j, _ in maxes], dtype=np.int64),
            np.asarray([c for _, c in maxes], dtype=np.int64),
        )
        parts, maxes, pending = [], [], 0
        return block

    for j in range(m - 1, n):
        cnt = math.comb(j, m - 1)
        start = 0
        while start < cnt:
            stop = min(cnt, start + max(_BLOCK_ROWS - pending, 1))
            parts.append(table[start:stop])
            maxes.append((j, stop - start))
            pending += stop - start
            start = stop
            if pending >= _BLOCK_ROWS:
                yield flush()
    if pending:
        yield flush()


def _iter_blocks_lex(n: int, m: int) -> Iterator[np.ndarray]:
    """Fallback block enumerator in lexicographic order (no prefix table)."""
    stream = itertools.combinations(range(n), m)
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(stream, _BLOCK_ROWS)),
            dtype=np.int64,
        )
        if flat.size == 0:
            return
        yield flat.reshape(-1, m)


def _increasing_tuple_blocks(n: int, m: int) -> Iterator[np.ndarray]:
    if m == 1:
        for start in range(0, n, _BLOCK_ROWS):
            yield np.arange(start, min(n, start + _BLOCK_ROWS), dtype=np.int64).reshape(-1, 1)
        return
    if math.comb(n - 1, m - 1) <= _MAX_PREFIX_TABLE_ROWS:
        yield from _iter_blocks_by_max(n, m)
    else:
        yield from _iter_blocks_lex(n, m)


def _grouped_by_max(n: int, m: int) -> bool:
    return m == 1 or math.comb(n - 1, m - 1) <= _MAX_PREFIX_TABLE_ROWS


def _checkpoint_sums(path: SamplePath, kernel: Kernel, checkpoints: Sequence[int]) -> np.ndarray:
    """Cumulative kernel sums: entry k covers all increasing tuples whose
    largest (1-based) index is <= checkpoints[k].

    In the grouped enumeration the partial-sum stream depends only on
    (path, kernel), not on the checkpoint grid, and a single running
    compensated accumulator is snapshotted at grid boundaries; prefix values
    are therefore bit-identical to one-shot evaluations at the same n.
    """
    pts = path.points
    bounds = [int(c) for c in checkpoints]
    n, m = bounds[-1], kernel.order
    sums = np.empty(len(bounds), dtype=np.float64)

    if _grouped_by_max(n, m):
        running = _KahanSum()
        k = 0
        for block in _increasing_tuple_blocks(n, m):
            values = kernel.eval_tuples(pts[block])
            jcol = block[:, -1]
            starts = np.flatnonzero(np.concatenate(([True], jcol[1:] != jcol[:-1])))
            partials = np.add.reduceat(values, starts) if values.size else values
            for j, partial in zip(jcol[starts], partials):
                while k < len(bounds) and bounds[k] < j + 1:
                    sums[k] = running.total
                    k += 1
                running.add(float(partial))
        while k < len(bounds):
            sums[k] = running.total
            k += 1
        return sums

    # Lex-order fallback for very large prefix tables: per-bucket compensated
    # accumulation folded in grid order (no cross-grid bit guarantee).
    bounds_arr = np.asarray(bounds, dtype=np.int64)
    accumulators = [_KahanSum() for _ in bounds]
    for block in _iter_blocks_lex(n, m):
        values = kernel.eval_tuples(pts[block])
        bucket = np.searchsorted(bounds_arr, block[:, -1] + 1, side="left")
        partial = np.bincount(bucket, weights=values, minlength=len(bounds))
        for acc, part in zip(accumulators, partial):
            acc.add(float(part))
    running = _KahanSum()
    for k, acc in enumerate(accumulators):
        running.add(acc.total)
        sums[k] = running.total
    return sums


def _require_feasible(n: int, m: int) -> None:
    if math.comb(n, m) > EXACT_EVAL_BUDGET:
        raise InfeasibilityError(
            f"exact evaluation needs binom({n}, {m}) = {math.comb(n, m)} kernel "
            f"evaluations (budget {EXACT_EVAL_BUDGET}); use the incomplete estimator"
        )


def u_statistic(path: SamplePath, kernel: Kernel) -> float:
    """The exact U-statistic: the kernel averaged over all increasing index tuples."""
    n, m = len(path), kernel.order
    if n < m:
        raise ValueError(f"path length {n} is smaller than the kernel order {m}")
    _require_feasible(n, m)
    total = _checkpoint_sums(path, kernel, [n])[0]
    return total / math.comb(n, m)


def prefix_u_statistics(path: SamplePath, kernel: Kernel, checkpoints: Sequence[int]) -> PrefixSeries:
    """U-statistic values at each checkpoint, in one pass over the tuple set.

    Checkpoints must be strictly increasing, at least the kernel order, and
    at most the path length.  Total cost is one enumeration of the tuples of
    the largest checkpoint, not one enumeration per checkpoint.
    """
    n, m = len(path), kernel.order
    cps = [int(c) for c in checkpoints]
    if not cps:
        raise ValueError("at least one checkpoint is required")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError(f"checkpoints must be strictly increasing, got {cps}")
    if cps[0] < m:
        raise ValueError(f"checkpoints must be >= the kernel order {m}, got {cps[0]}")
    if cps[-1] > n:
        raise ValueError(f"largest checkpoint {cps[-1]} exceeds the path length {n}")
    _require_feasible(cps[-1], m)
    sums = _checkpoint_sums(path, kernel, cps)
    values = sums / np.array([math.comb(c, m) for c in cps], dtype=np.float64)
    return PrefixSeries(tuple(cps), values)


def _grid_blocks(n: int, m: int) -> Iterator[np.ndarray]:
    """All m-tuples over range(n) (repeats allowed), in mixed-radix order."""
    total = n**m
    powers = n ** np.arange(m - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _BLOCK_ROWS):
        codes = np.arange(start, min(total, start + _BLOCK_ROWS), dtype=np.int64)
        yield (codes[:, None] // powers[None, :]) % n


def _grid_sum(path: SamplePath, kernel: Kernel, diagonal_only: bool) -> float:
    n, m = len(path), kernel.order
    if n**m > EXACT_EVAL_BUDGET:
        raise InfeasibilityError(f"full-grid evaluation needs {n}**{m} kernel evaluations")
    pts = path.points
    acc = _KahanSum()
    for block in _grid_blocks(n, m):
        if diagonal_only:
            if m == 1:
                continue
            srt = np.sort(block, axis=1)
            mask = np.any(srt[:, 1:] == srt[:, :-1], axis=1)
            if not np.any(mask):
                continue
            block = block[mask]
        acc.add(float(np.sum(kernel.eval_tuples(pts[block]))))
    return acc.total


def v_statistic(path: SamplePath, kernel: Kernel) -> float:
    """The V-statistic: the kernel averaged over the full m-fold index grid."""
    n, m = len(path), kernel.order
    return _grid_sum(path, kernel, diagonal_only=False) / float(n**m)


def diagonal_sum(path: SamplePath, kernel: Kernel) -> float:
    """Unnormalized kernel sum over grid tuples with at least one repeated index."""
    return _grid_sum(path, kernel, diagonal_only=True)


def u_from_v_decomposition(path: SamplePath, kernel: Kernel) -> float:
    """Recover the U-statistic from the V-statistic and the repeated-index sum.

    For a symmetric kernel the full m-fold grid sum splits into m! copies of
    the increasing-tuple sum plus the repeated-index sum, so

        U = (grid_sum - diagonal_sum) / (m! * binom(n, m)).

    Agrees with ``u_statistic`` to floating precision; requires symmetry.
    """
    n, m = len(path), kernel.order
    if not kernel.symmetric:
        raise ValueError("the U-from-V decomposition requires a symmetric kernel")
    if n < m:
        raise ValueError(f"path length {n} is smaller than the kernel order {m}")
    full = _grid_sum(path, kernel, diagonal_only=False)
    diag = _grid_sum(path, kernel, diagonal_only=True)
    return (full - diag) / (math.factorial(m) * math.comb(n, m))


def sample_increasing_tuples(gen: np.random.Generator, n: int, m: int, count: int) -> np.ndarray:
    """Uniform sample of ``count`` increasing m-tuples from range(n), with replacement.

    Rejection-resamples rows containing a repeated index, then sorts; each
    unordered m-subset is equally likely.
    """
    if n < m:
        raise ValueError(f"cannot sample {m}-tuples from {n} indices")
    if n == m:
        return np.tile(np.arange(n, dtype=np.int64), (count, 1))
    idx = gen.integers(0, n, size=(count, m), dtype=np.int64)
    while True:
        srt = np.sort(idx, axis=1)
        bad = np.flatnonzero(np.any(srt[:, 1:] == srt[:, :-1], axis=1))
        if bad.size == 0:
            return srt
        idx[bad] = gen.integers(0, n, size=(bad.size, m), dtype=np.int64)


def incomplete_u_statistic(path: SamplePath, kernel: Kernel, samples: int, rng_seed: int) -> float:
    """Unbiased sampled estimate of the U-statistic from uniform random tuples.

    Averages the kernel over ``samples`` index tuples drawn uniformly with
    replacement.  Deterministic given the seed.  When the kernel carries a
    ``sampling_core``, each sampled tuple is evaluated once through the core
    on a uniformly permuted copy instead of through the fully symmetrized
    evaluator; the estimate stays unbiased at a fraction of the work.
    """
    n, m = len(path), kernel.order
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if n < m:
        raise ValueError(f"path length {n} is smaller than the kernel order {m}")
    gen = _rng.generator(rng_seed, _rng.TUPLES)
    pts = path.points
    acc = _KahanSum()
    remaining = samples
    while remaining > 0:
        count = min(remaining, _BLOCK_ROWS)
        idx = sample_increasing_tuples(gen, n, m, count)
        stacked = pts[idx]
        if kernel.sampling_core is not None:
            perm = np.argsort(gen.random(size=(count, m)), axis=1)
            stacked = np.take_along_axis(stacked, perm[:, :, None], axis=1)
            values = np.asarray(kernel.sampling_core(stacked), dtype=np.float64)
        else:
            values = kernel.eval_tuples(stacked)
        acc.add(float(np.sum(values)))
        remaining -= count
    return acc.total / samples


def truncate_value(t: float, level: float) -> float:
    """Clamp ``t`` to [-level, level]: -level below, t inside, level at and above."""
    level = float(level)
    if not (math.isfinite(level) and level > 0):
        raise ValueError(f"truncation level must be positive and finite, got {level}")
    t = float(t)
    if t < -level:
        return -level
    if t >= level:
        return level
    return t


def truncate_kernel(kernel: Kernel, level: float) -> Kernel:
    """Compose the kernel with the clamp to [-level, level].

    Preserves order and symmetry; |result| <= level everywhere.  The
    closed-form limit hook (and any sampling core) survives only when the
    kernel has a known bound not exceeding the level, in which case the
    clamp is the identity.
    """
    level = float(level)
    if not (math.isfinite(level) and level > 0):
        raise ValueError(f"truncation level must be positive and finite, got {level}")
    unchanged = kernel.bound is not None and kernel.bound <= level
    if kernel.vectorized:
        inner = kernel.fn
        fn = lambda block: np.clip(inner(block), -level, level)  # noqa: E731
    else:
        inner = kernel.fn
        fn = lambda *coords: truncate_value(inner(*coords), level)  # noqa: E731
    return kernel.replace(
        name=f"{kernel.name}|clamp{level:g}",
        fn=fn,
        bound=level if not unchanged else kernel.bound,
        analytic_limit=kernel.analytic_limit if unchanged else None,
        sampling_core=kernel.sampling_core if unchanged else None,
    )


def binomial_weighted_average(values: Sequence[float], m: int) -> float:
    """Binomially weighted average of f_{m+1}, ..., f_n.

    Computes sum_j binom(j-1, m) f_j / binom(n, m+1) for j = m+1, ..., n,
    where n = m + len(values).  The weights telescope: on a constant
    sequence the average returns the constant exactly.  m = 0 gives the
    plain arithmetic mean.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("at least one value is required")
    n = m + len(vals)
    weighted = math.fsum(math.comb(m + k, m) * v for k, v in enumerate(vals))
    return weighted / math.comb(n, m + 1)


def trailing_pair_average(
    path: SamplePath,
    kernel2: Kernel,
    j: int,
    level: Optional[float] = None,
) -> float:
    """Average of the (clamped) order-2 kernel against the j-th observation.

    Returns (1/j) * sum_{i<j} h(X_i, X_j) with 1-based j in [2, n]; when
    ``level`` is given the kernel is clamped first.  Note the 1/j
    normalization (not 1/(j-1)).
    """
    if kernel2.order != 2:
        raise ValueError(f"an order-2 kernel is required, got order {kernel2.order}")
    n = len(path)
    if not 2 <= j <= n:
        raise ValueError(f"j must be in [2, {n}], got {j}")
    k = kernel2 if level is None else truncate_kernel(kernel2, level)
    pts = path.points
    left = pts[: j - 1]
    right = np.broadcast_to(pts[j - 1], left.shape)
    stacked = np.stack([left, right], axis=1)
    return float(np.sum(k.eval_tuples(stacked))) / j
