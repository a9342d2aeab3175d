"""Kernel families and the registry used for configurable construction.

Registered names:

* ``symmetry3``          - the order-3 sign kernel used to test whether a
                           distribution is symmetric about a point
* ``dcov6``              - order-6 distance-covariance kernel over pairs,
                           with the second distance-contrast factor drawn
                           from pair positions 1-4
* ``dcov6-standard``     - the statistically standard indexing: the second
                           factor uses pair positions 1, 2, 5, 6
* ``indicator``          - product of box-membership indicators
* ``polynomial-product`` - product of one scalar polynomial per argument
* ``user-table``         - step-function kernel on a 1-D interval grid

All registry kernels are vectorized and pure.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Optional, Sequence

import numpy as np

from .core import ConfigurationError, Kernel

__all__ = [
    "Box",
    "KernelSpec",
    "registered_kernels",
    "build_kernel",
    "symmetry_test_kernel",
    "distance_contrast",
    "dcov_core",
    "dcov_kernel",
    "indicator_product_kernel",
    "polynomial_product_kernel",
    "table_kernel",
]


@dataclasses.dataclass(frozen=True)
class Box:
    """A product of closed-open intervals [lo, hi) in R^d; +-inf allowed."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not bounds:
            raise ConfigurationError("a box needs at least one dimension")
        for lo, hi in bounds:
            if math.isnan(lo) or math.isnan(hi) or not lo < hi:
                raise ConfigurationError(f"box interval must satisfy lo < hi, got [{lo}, {hi})")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Membership of points with coordinates on the last axis."""
        x = np.asarray(x, dtype=np.float64)
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return np.all((x >= lo) & (x < hi), axis=-1)


@dataclasses.dataclass(frozen=True)
class KernelSpec:
    """A registry name plus the parameters of that kernel family."""

    name: str
    parameters: dict = dataclasses.field(default_factory=dict)


def symmetry_test_kernel() -> Kernel:
    """Order-3 kernel sgn(2a-b-c) + sgn(2b-a-c) + sgn(2c-a-b) on the line.

    Bounded by 3 and symmetric.  Its limit is 0 under any atomless law that
    is symmetric about a point, so a nonzero limit indicates asymmetry.
    """

    def fn(block: np.ndarray) -> np.ndarray:
        a, b, c = block[:, 0, 0], block[:, 1, 0], block[:, 2, 0]
        return np.sign(2 * a - b - c) + np.sign(2 * b - a - c) + np.sign(2 * c - a - b)

    def limit(model) -> Optional[float]:
        law = model.law
        if getattr(law, "symmetry_center", None) is not None and getattr(law, "atomless", False):
            return 0.0
        return None

    return Kernel(
        order=3,
        symmetric=True,
        name="symmetry3",
        fn=fn,
        vectorized=True,
        dim=1,
        bound=3.0,
        analytic_limit=limit,
    )


def _pairwise_distance(block: np.ndarray, i: int, j: int) -> np.ndarray:
    diff = block[:, i, :] - block[:, j, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _contrast(block: np.ndarray, q: tuple[int, int, int, int]) -> np.ndarray:
    """d(z_q0, z_q1) - d(z_q0, z_q2) - d(z_q1, z_q3) + d(z_q2, z_q3), vectorized."""
    return (
        _pairwise_distance(block, q[0], q[1])
        - _pairwise_distance(block, q[0], q[2])
        - _pairwise_distance(block, q[1], q[3])
        + _pairwise_distance(block, q[2], q[3])
    )


def distance_contrast(z1, z2, z3, z4, metric=None) -> float:
    """The four-point signed distance combination d(z1,z2) - d(z1,z3) - d(z2,z4) + d(z3,z4)."""
    if metric is None:
        from .core import euclidean_distance as metric  # default metric
    return metric(z1, z2) - metric(z1, z3) - metric(z2, z4) + metric(z3, z4)


def dcov_core(pairs: Sequence, split: int = 1, standard: bool = True, metric=None) -> float:
    """Unsymmetrized distance-covariance core on six paired points.

    Each element of ``pairs`` is the concatenated pair coordinates; the first
    ``split`` coordinates are the first sub-point.  The value is the product
    of the distance contrast of the first four x sub-points with the distance
    contrast of y sub-points 1, 2, 5, 6 (``standard=True``) or 1, 2, 3, 4.
    """
    pts = np.asarray([np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in pairs])
    if pts.shape[0] != 6:
        raise ValueError(f"six pairs are required, got {pts.shape[0]}")
    if not 0 < split < pts.shape[1]:
        raise ValueError(f"pair split {split} must lie inside the {pts.shape[1]}-vector")
    xs = [pts[i, :split] for i in range(6)]
    ys = [pts[i, split:] for i in range(6)]
    y_idx = (0, 1, 4, 5) if standard else (0, 1, 2, 3)
    return distance_contrast(xs[0], xs[1], xs[2], xs[3], metric=metric) * distance_contrast(
        ys[y_idx[0]], ys[y_idx[1]], ys[y_idx[2]], ys[y_idx[3]], metric=metric
    )


_PERMS6 = np.array(list(itertools.permutations(range(6))), dtype=np.int64)


def dcov_kernel(split: int = 1, dim: int = 2, standard: bool = True) -> Kernel:
    """Order-6 symmetrized distance-covariance kernel over paired points.

    The exact evaluator averages the core over all 720 orderings of the six
    pairs.  The unsymmetrized core is exposed as the sampling core, so
    incomplete estimation pays for one core evaluation per sampled tuple.
    The limit is 0 whenever the model's pair coordinates are independent.
    """
    if not 0 < split < dim:
        raise ConfigurationError(f"kernel.split must satisfy 0 < split < dim, got split={split}, dim={dim}")
    y_idx = (0, 1, 4, 5) if standard else (0, 1, 2, 3)

    def core(block: np.ndarray) -> np.ndarray:
        x = block[:, :, :split]
        y = block[:, :, split:]
        fx = _contrast(x, (0, 1, 2, 3))
        fy = _contrast(y, y_idx)
        return fx * fy

    def fn(block: np.ndarray) -> np.ndarray:
        acc = np.zeros(block.shape[0], dtype=np.float64)
        for perm in _PERMS6:
            acc += core(block[:, perm, :])
        return acc / 720.0

    def limit(model) -> Optional[float]:
        if getattr(model.law, "independent_pair", False):
            return 0.0
        return None

    name = "dcov6-standard" if standard else "dcov6"
    return Kernel(
        order=6,
        symmetric=True,
        name=name,
        fn=fn,
        vectorized=True,
        dim=dim,
        analytic_limit=limit,
        sampling_core=core,
        params={"split": split, "standard": standard},
    )


def indicator_product_kernel(boxes: Sequence[Box]) -> Kernel:
    """Product of box-membership indicators, one box per argument position.

    Symmetric exactly when all boxes coincide.  Its limit under a model with
    closed-form box probabilities is the product of those probabilities.
    """
    boxes = tuple(boxes)
    if not boxes:
        raise ConfigurationError("at least one box is required")
    dim = boxes[0].dim
    if any(b.dim != dim for b in boxes):
        raise ConfigurationError("all boxes must share one dimension")
    symmetric = all(b == boxes[0] for b in boxes)

    def fn(block: np.ndarray) -> np.ndarray:
        out = np.ones(block.shape[0], dtype=np.float64)
        for pos, box in enumerate(boxes):
            out *= box.contains(block[:, pos, :])
        return out

    def limit(model) -> Optional[float]:
        probs = [model.law.box_probability(box) for box in boxes]
        if any(p is None for p in probs):
            return None
        return float(np.prod(probs))

    return Kernel(
        order=len(boxes),
        symmetric=symmetric,
        name="indicator",
        fn=fn,
        vectorized=True,
        dim=dim,
        bound=1.0,
        analytic_limit=limit,
        limit_method="exact_box",
        params={"boxes": boxes},
    )


def polynomial_product_kernel(order: int, coefficients: Sequence[float]) -> Kernel:
    """h(x_1, ..., x_m) = prod_l p(x_l) for a scalar polynomial p on the line.

    ``coefficients`` are ascending powers.  The limit under a model whose
    law has closed-form raw moments is (E p(X))^m, one sharp value per
    mixture component.
    """
    if order < 1:
        raise ConfigurationError(f"kernel.order must be >= 1, got {order}")
    coeffs = np.asarray([float(c) for c in coefficients], dtype=np.float64)
    if coeffs.size == 0:
        raise ConfigurationError("kernel.coefficients must be non-empty")
    if not np.all(np.isfinite(coeffs)):
        raise ConfigurationError("kernel.coefficients must be finite")

    def fn(block: np.ndarray) -> np.ndarray:
        vals = np.polynomial.polynomial.polyval(block[:, :, 0], coeffs)
        return np.prod(vals, axis=1)

    def limit(model) -> Optional[float]:
        moments = [model.law.raw_moment(k) for k in range(coeffs.size)]
        if any(mo is None for mo in moments):
            return None
        mean_p = float(np.dot(coeffs, moments))
        return mean_p**order

    return Kernel(
        order=order,
        symmetric=True,
        name="polynomial-product",
        fn=fn,
        vectorized=True,
        dim=1,
        analytic_limit=limit,
        params={"coefficients": tuple(float(c) for c in coeffs)},
    )


def table_kernel(order: int, cuts: Sequence[float], values) -> Kernel:
    """Step-function kernel on the interval grid defined by ``cuts`` (1-D).

    The cuts split the line into len(cuts)+1 closed-open cells; ``values``
    is an m-dimensional table indexed by the cell of each argument.  This is
    the general linear combination of indicator products, so its limit under
    a law with a closed-form CDF is the table contracted with the cell
    probabilities.
    """
    if order < 1:
        raise ConfigurationError(f"kernel.order must be >= 1, got {order}")
    cuts_arr = np.asarray([float(c) for c in cuts], dtype=np.float64)
    if cuts_arr.size < 1 or not np.all(np.isfinite(cuts_arr)):
        raise ConfigurationError("kernel.cuts must be a non-empty finite sequence")
    if np.any(np.diff(cuts_arr) <= 0):
        raise ConfigurationError("kernel.cuts must be strictly increasing")
    table = np.asarray(values, dtype=np.float64)
    cells = cuts_arr.size + 1
    if table.shape != (cells,) * order:
        raise ConfigurationError(
            f"kernel.values must have shape {(cells,) * order} for {cuts_arr.size} cuts, got {table.shape}"
        )
    if not np.all(np.isfinite(table)):
        raise ConfigurationError("kernel.values must be finite")
    symmetric = all(
        np.array_equal(table, np.transpose(table, perm))
        for perm in itertools.permutations(range(order))
    )

    def fn(block: np.ndarray) -> np.ndarray:
        bins = np.searchsorted(cuts_arr, block[:, :, 0], side="right")
        return table[tuple(bins[:, pos] for pos in range(order))]

    edges = np.concatenate([[-np.inf], cuts_arr, [np.inf]])

    def limit(model) -> Optional[float]:
        probs = [
            model.law.box_probability(Box(((edges[i], edges[i + 1]),)))
            for i in range(cells)
        ]
        if any(p is None for p in probs):
            return None
        probs_arr = np.asarray(probs, dtype=np.float64)
        out = table
        for _ in range(order):
            out = np.tensordot(out, probs_arr, axes=([-1], [0]))
        return float(out)

    return Kernel(
        order=order,
        symmetric=symmetric,
        name="user-table",
        fn=fn,
        vectorized=True,
        dim=1,
        bound=float(np.max(np.abs(table))),
        analytic_limit=limit,
        limit_method="exact_box",
        params={"cuts": tuple(cuts_arr), "values": table},
    )


def _build_symmetry3(params: dict) -> Kernel:
    return symmetry_test_kernel()


def _build_dcov(standard: bool):
    def build(params: dict) -> Kernel:
        split = int(params.get("split", 1))
        dim = int(params.get("dim", 2 * split))
        return dcov_kernel(split=split, dim=dim, standard=standard)

    return build


def _build_indicator(params: dict) -> Kernel:
    boxes = params.get("boxes")
    if not boxes:
        raise ConfigurationError("kernel.boxes is required for the indicator kernel")
    boxes = tuple(b if isinstance(b, Box) else Box(tuple(b)) for b in boxes)
    return indicator_product_kernel(boxes)


def _build_polynomial(params: dict) -> Kernel:
    if "order" not in params:
        raise ConfigurationError("kernel.order is required for the polynomial-product kernel")
    if "coefficients" not in params:
        raise ConfigurationError("kernel.coefficients is required for the polynomial-product kernel")
    return polynomial_product_kernel(int(params["order"]), params["coefficients"])


def _build_table(params: dict) -> Kernel:
    for field in ("order", "cuts", "values"):
        if field not in params:
            raise ConfigurationError(f"kernel.{field} is required for the user-table kernel")
    return table_kernel(int(params["order"]), params["cuts"], params["values"])


_REGISTRY = {
    "symmetry3": _build_symmetry3,
    "dcov6": _build_dcov(standard=False),
    "dcov6-standard": _build_dcov(standard=True),
    "indicator": _build_indicator,
    "polynomial-product": _build_polynomial,
    "user-table": _build_table,
}


def registered_kernels() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def build_kernel(spec: KernelSpec) -> Kernel:
    """Construct a fully parameterized kernel from a registry spec."""
    try:
        builder = _REGISTRY[spec.name]
    except KeyError:
        raise ConfigurationError(
            f"unknown kernel {spec.name!r}; registered kernels: {', '.join(registered_kernels())}"
        ) from None
    return builder(dict(spec.parameters))
