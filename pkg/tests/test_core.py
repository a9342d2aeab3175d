import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ustatlab.core import (
    Kernel,
    Point,
    SamplePath,
    euclidean_distance,
    sign,
    validate_kernel_symmetry,
)
from ustatlab.kernels import symmetry_test_kernel


class TestSign:
    def test_positive(self):
        assert sign(2.0) == 1

    def test_zero_is_exactly_zero(self):
        assert sign(0.0) == 0
        assert sign(-0.0) == 0

    def test_negative(self):
        assert sign(-0.5) == -1

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            sign(math.nan)
        with pytest.raises(ValueError):
            sign(math.inf)

    @given(st.floats(allow_nan=False, allow_infinity=False, width=64))
    def test_odd(self, t):
        assert sign(-t) == -sign(t)


class TestEuclideanDistance:
    def test_identity_of_indiscernibles(self):
        assert euclidean_distance([0.0], [0.0]) == 0.0

    def test_one_dimensional_absolute_difference(self):
        assert euclidean_distance([0.0], [3.0]) == 3.0

    def test_triangle_345(self):
        assert euclidean_distance([1.0, 2.0], [4.0, 6.0]) == pytest.approx(5.0, abs=0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            euclidean_distance([0.0], [0.0, 1.0])

    def test_triangle_inequality_random_triples(self, rng):
        for _ in range(1000):
            a, b, c = rng.normal(size=(3, 3))
            ab = euclidean_distance(a, b)
            bc = euclidean_distance(b, c)
            ac = euclidean_distance(a, c)
            assert ac <= ab + bc + 1e-12

    def test_symmetry(self, rng):
        a, b = rng.normal(size=(2, 4))
        assert euclidean_distance(a, b) == euclidean_distance(b, a)


class TestPoint:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Point(np.array([0.0, math.nan]))

    def test_rejects_infinity(self):
        with pytest.raises(ValueError):
            Point(np.array([math.inf]))

    def test_pair_split(self):
        p = Point(np.array([1.0, 2.0, 3.0]), pair_split=1)
        x, y = p.sub_points()
        assert list(x) == [1.0]
        assert list(y) == [2.0, 3.0]

    def test_immutable(self):
        p = Point(np.array([1.0]))
        with pytest.raises(ValueError):
            p.coords[0] = 2.0


class TestSamplePath:
    def test_one_dimensional_input_reshaped(self):
        path = SamplePath(np.array([1.0, 2.0]))
        assert path.points.shape == (2, 1)
        assert path.dim == 1
        assert len(path) == 2

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            SamplePath(np.array([1.0, math.nan]))

    def test_prefix_shares_metadata(self):
        path = SamplePath(np.arange(6.0), seed=7, process_id="x", latent_component=None)
        pre = path.prefix(3)
        assert len(pre) == 3
        assert pre.seed == 7
        assert pre.process_id == "x"

    def test_prefix_bounds(self):
        path = SamplePath(np.arange(4.0))
        with pytest.raises(ValueError):
            path.prefix(0)
        with pytest.raises(ValueError):
            path.prefix(5)


class TestKernelType:
    def test_call_arity_checked(self):
        k = symmetry_test_kernel()
        with pytest.raises(ValueError):
            k(1.0, 2.0)

    def test_scalar_and_batch_agree(self, rng):
        k = symmetry_test_kernel()
        pts = rng.normal(size=(40, 3, 1))
        batch = k.eval_tuples(pts)
        scalar = [k(*row) for row in pts]
        np.testing.assert_allclose(batch, scalar, rtol=0, atol=0)

    def test_evaluator_finite_on_random_inputs(self, rng):
        k = symmetry_test_kernel()
        vals = k.eval_tuples(rng.normal(size=(1000, 3, 1)))
        assert np.all(np.isfinite(vals))


class TestValidateKernelSymmetry:
    def test_symmetry3_passes(self):
        assert validate_kernel_symmetry(symmetry_test_kernel(), trials=100, rng_seed=1)

    def test_antisymmetric_kernel_fails(self):
        k = Kernel(order=2, symmetric=False, name="difference", fn=lambda x, y: float(x[0] - y[0]), dim=1)
        assert not validate_kernel_symmetry(k, trials=20, rng_seed=1)

    def test_constant_kernel_passes(self):
        k = Kernel(order=3, symmetric=True, name="const", fn=lambda *_: 2.5, dim=1)
        assert validate_kernel_symmetry(k, trials=10, rng_seed=1)
