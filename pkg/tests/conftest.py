"""Shared test helpers: independent brute-force oracles and random inputs.

The oracles here deliberately avoid the library's enumeration machinery:
nested recursive loops over raw indices, plain Python sums.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from ustatlab.core import Kernel


def brute_force_u_statistic(points: np.ndarray, kernel_fn, m: int) -> float:
    """Naive U-statistic: recursive nested loops over increasing indices."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    n = points.shape[0]
    values = []

    def rec(start: int, chosen: list[int]) -> None:
        if len(chosen) == m:
            values.append(float(kernel_fn(*[points[i] for i in chosen])))
            return
        for i in range(start, n):
            rec(i + 1, chosen + [i])

    rec(0, [])
    assert len(values) == math.factorial(n) // (math.factorial(m) * math.factorial(n - m))
    return sum(values) / len(values)


def random_plain_kernel(rng: np.random.Generator, m: int) -> Kernel:
    """A random smooth order-m kernel, generally asymmetric, scalar evaluator."""
    a = rng.normal(size=m)
    b = rng.normal(size=m)
    c = rng.normal()

    def fn(*coords):
        xs = [float(x[0]) for x in coords]
        return c + math.sin(sum(ai * xi for ai, xi in zip(a, xs))) + math.prod(
            xi + bi for xi, bi in zip(xs, b)
        )

    return Kernel(order=m, symmetric=False, name="random-plain", fn=fn, dim=1)


def random_symmetric_kernel(rng: np.random.Generator, m: int) -> Kernel:
    """A random kernel built from symmetric functions of the arguments."""
    c = rng.normal(size=4)

    def fn(*coords):
        xs = [float(x[0]) for x in coords]
        s1 = sum(xs)
        s2 = sum(x * x for x in xs)
        prod = math.prod(xs)
        return c[0] + c[1] * s1 + c[2] * math.cos(s2) + c[3] * prod

    return Kernel(order=m, symmetric=True, name="random-symmetric", fn=fn, dim=1)


def random_pair_kernel(rng: np.random.Generator) -> Kernel:
    """A random order-2 kernel, unbounded, generally asymmetric."""
    a, b, c = rng.normal(size=3)

    def fn(x, y):
        u, v = float(x[0]), float(y[0])
        return a * u * v + b * u * u * math.sin(v) + c * (u - 2.0 * v)

    return Kernel(order=2, symmetric=False, name="random-pair", fn=fn, dim=1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240808)
