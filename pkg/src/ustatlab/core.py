"""Shared domain types: points, sample paths, kernels, and the sign map.

The state space is a finite-dimensional real vector space (paired spaces are
represented by concatenating the two sub-points and recording the split
index).  All types here are immutable after construction and safe to share
across workers; kernel evaluators are required to be pure.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np

from . import rng as _rng

__all__ = [
    "ConfigurationError",
    "InfeasibilityError",
    "Point",
    "SamplePath",
    "Kernel",
    "sign",
    "euclidean_distance",
    "validate_kernel_symmetry",
]


class ConfigurationError(ValueError):
    """A spec or config object is structurally invalid."""


class InfeasibilityError(ConfigurationError):
    """An exact computation would exceed the evaluation budget."""


#: Maximum number of kernel evaluations accepted in exact mode.
EXACT_EVAL_BUDGET = 1_000_000_000


def sign(t: float) -> int:
    """Sign of ``t``: +1 if t > 0, -1 if t < 0, and exactly 0 at t == 0.

    Zero uses exact floating comparison (no epsilon band); atomless input
    laws hit it with probability zero.  Non-finite input is a domain error.
    """
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"sign requires a finite argument, got {t!r}")
    if t > 0.0:
        return 1
    if t < 0.0:
        return -1
    return 0


def _as_coords(value, expected_dim: Optional[int] = None) -> np.ndarray:
    if isinstance(value, Point):
        coords = value.coords
    else:
        coords = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if coords.ndim != 1:
        raise ValueError(f"a point must be a 1-D coordinate vector, got shape {coords.shape}")
    if not np.all(np.isfinite(coords)):
        raise ValueError("point coordinates must all be finite")
    if expected_dim is not None and coords.shape[0] != expected_dim:
        raise ValueError(f"dimension mismatch: expected {expected_dim}, got {coords.shape[0]}")
    return coords


@dataclasses.dataclass(frozen=True)
class Point:
    """A state-space point: a finite real vector of dimension >= 1.

    For paired spaces the two sub-points are concatenated and ``pair_split``
    records where the second one begins.
    """

    coords: np.ndarray
    pair_split: Optional[int] = None

    def __post_init__(self):
        coords = np.atleast_1d(np.asarray(self.coords, dtype=np.float64))
        if coords.ndim != 1 or coords.size < 1:
            raise ValueError("Point.coords must be a non-empty 1-D vector")
        if not np.all(np.isfinite(coords)):
            raise ValueError("Point.coords must be finite (no NaN or infinity)")
        if self.pair_split is not None and not 0 < self.pair_split < coords.size:
            raise ValueError("Point.pair_split must lie strictly inside the vector")
        coords = coords.copy()
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def sub_points(self) -> tuple[np.ndarray, np.ndarray]:
        if self.pair_split is None:
            raise ValueError("not a paired point")
        return self.coords[: self.pair_split], self.coords[self.pair_split :]


def euclidean_distance(a, b) -> float:
    """Euclidean norm of a - b; the default metric for all registry kernels."""
    ca = _as_coords(a)
    cb = _as_coords(b, expected_dim=ca.shape[0])
    return float(np.linalg.norm(ca - cb))


@dataclasses.dataclass(frozen=True)
class SamplePath:
    """A finite trajectory with provenance metadata.

    ``points`` is an (n, d) array; ``latent_component`` is set exactly when
    the path was generated by a mixture process (it records which ergodic
    component the whole path came from).
    """

    points: np.ndarray
    seed: int = 0
    process_id: str = ""
    latent_component: Optional[int] = None
    pair_split: Optional[int] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"SamplePath.points must be an (n, d) array with n, d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("SamplePath.points must be finite")
        if self.pair_split is not None and not 0 < self.pair_split < pts.shape[1]:
            raise ValueError("SamplePath.pair_split must lie strictly inside the coordinate vector")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "seed", int(self.seed))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def point(self, i: int) -> Point:
        """The i-th observation (0-based) as a Point."""
        return Point(self.points[i], pair_split=self.pair_split)

    def prefix(self, n: int) -> "SamplePath":
        """The path restricted to its first ``n`` observations."""
        if not 1 <= n <= len(self):
            raise ValueError(f"prefix length must be in [1, {len(self)}], got {n}")
        return SamplePath(
            self.points[:n],
            seed=self.seed,
            process_id=self.process_id,
            latent_component=self.latent_component,
            pair_split=self.pair_split,
        )


@dataclasses.dataclass(frozen=True)
class Kernel:
    """An order-m real-valued kernel on the state space.

    ``fn`` is the evaluator.  When ``vectorized`` is true it maps a stacked
    (B, m, d) array of argument tuples to a (B,) value array; otherwise it is
    a plain scalar function of m coordinate vectors.  Evaluators must be pure
    and return finite reals for finite inputs.

    Optional hooks:

    * ``analytic_limit(model)`` returns the product-measure integral of the
      kernel under ``model`` in closed form, or None when not applicable for
      that model (the caller then falls back to Monte Carlo).
      ``limit_method`` names the closed-form route for reporting ("analytic"
      or "exact_box").
    * ``sampling_core`` is a vectorized unsymmetrized core g whose value on a
      uniformly permuted argument tuple is an unbiased one-draw estimate of
      the (symmetrized) kernel; incomplete estimators may use it to avoid
      full symmetrization.
    * ``bound`` is a known uniform bound on |h| when one exists.
    """

    order: int
    symmetric: bool
    name: str
    fn: Callable
    vectorized: bool = False
    dim: Optional[int] = None
    bound: Optional[float] = None
    analytic_limit: Optional[Callable] = None
    limit_method: str = "analytic"
    sampling_core: Optional[Callable] = None
    params: dict = dataclasses.field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"kernel order must be >= 1, got {self.order}")
        if self.dim is not None and self.dim < 1:
            raise ValueError(f"kernel dim must be >= 1, got {self.dim}")

    def __call__(self, *args) -> float:
        if len(args) != self.order:
            raise ValueError(f"kernel {self.name!r} has order {self.order}, got {len(args)} arguments")
        coords = [_as_coords(a, expected_dim=self.dim) for a in args]
        if self.dim is None:
            dims = {c.shape[0] for c in coords}
            if len(dims) > 1:
                raise ValueError(f"dimension mismatch among kernel arguments: {sorted(dims)}")
        if self.vectorized:
            block = np.stack(coords)[np.newaxis, :, :]
            return float(np.asarray(self.fn(block)).reshape(()))
        return float(self.fn(*coords))

    def eval_tuples(self, tuples: np.ndarray) -> np.ndarray:
        """Evaluate on a stacked (B, m, d) array of argument tuples."""
        tuples = np.asarray(tuples, dtype=np.float64)
        if tuples.ndim != 3 or tuples.shape[1] != self.order:
            raise ValueError(f"expected a (B, {self.order}, d) array, got shape {tuples.shape}")
        if self.dim is not None and tuples.shape[2] != self.dim:
            raise ValueError(
                f"kernel {self.name!r} expects dimension {self.dim}, got points of dimension {tuples.shape[2]}"
            )
        if self.vectorized:
            out = np.asarray(self.fn(tuples), dtype=np.float64)
            return out.reshape(tuples.shape[0])
        return np.fromiter(
            (float(self.fn(*row)) for row in tuples),
            dtype=np.float64,
            count=tuples.shape[0],
        )

    def replace(self, **changes) -> "Kernel":
        return dataclasses.replace(self, **changes)


def validate_kernel_symmetry(kernel: Kernel, trials: int = 100, rng_seed: int = 0) -> bool:
    """Spot-check permutation invariance on random Gaussian argument tuples.

    Returns True iff every sampled tuple agrees with a random permutation of
    itself to 1e-12 relative tolerance.  Order-1 kernels are trivially
    symmetric.  Diagnostic only: never raises on asymmetry.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if kernel.order < 2:
        return True
    gen = _rng.generator(rng_seed, _rng.MC, 0)
    d = kernel.dim if kernel.dim is not None else 1
    for _ in range(trials):
        pts = gen.normal(size=(kernel.order, d))
        perm = gen.permutation(kernel.order)
        base = kernel(*pts)
        permuted = kernel(*pts[perm])
        if abs(base - permuted) > 1e-12 * max(1.0, abs(base)):
            return False
    return True
