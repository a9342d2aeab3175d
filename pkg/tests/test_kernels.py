import itertools
import math

import numpy as np
import pytest

from ustatlab.core import ConfigurationError
from ustatlab.kernels import (
    Box,
    KernelSpec,
    build_kernel,
    dcov_core,
    dcov_kernel,
    distance_contrast,
    indicator_product_kernel,
    polynomial_product_kernel,
    registered_kernels,
    symmetry_test_kernel,
    table_kernel,
)
from ustatlab.limits import RandomMeasureModel, estimate_limit
from ustatlab.processes import Normal, ProductLaw, Uniform


class TestSymmetryTestKernel:
    def test_all_equal_gives_zero(self):
        k = symmetry_test_kernel()
        assert k(0.0, 0.0, 0.0) == 0.0

    def test_hand_value(self):
        # sgn(2) + sgn(-1) + sgn(-1) = -1
        assert symmetry_test_kernel()(1.0, 0.0, 0.0) == -1.0

    def test_invariant_under_all_six_permutations(self):
        k = symmetry_test_kernel()
        args = (3.0, 1.0, -2.0)
        base = k(*args)
        for perm in itertools.permutations(args):
            assert k(*perm) == base

    def test_bounded_by_three_and_integer(self, rng):
        k = symmetry_test_kernel()
        vals = k.eval_tuples(rng.normal(size=(2000, 3, 1)))
        assert np.all(np.abs(vals) <= 3.0)
        assert np.all(vals == np.round(vals))

    def test_odd_under_reflection(self, rng):
        k = symmetry_test_kernel()
        for _ in range(200):
            x = rng.normal(size=3)
            args = [2 * x[0] - x[1] - x[2], 2 * x[1] - x[0] - x[2], 2 * x[2] - x[0] - x[1]]
            if any(a == 0.0 for a in args):
                continue
            assert k(-x[0], -x[1], -x[2]) == -k(x[0], x[1], x[2])


class TestDistanceContrast:
    def test_all_identical_is_zero(self):
        z = [1.0, 2.0]
        assert distance_contrast(z, z, z, z) == 0.0

    def test_one_dimensional_hand_value(self):
        assert distance_contrast([0.0], [1.0], [0.0], [1.0]) == pytest.approx(2.0, abs=0)

    def test_pairwise_cancellation(self, rng):
        z1, z2 = rng.normal(size=(2, 3))
        assert distance_contrast(z1, z2, z2, z1) == pytest.approx(0.0, abs=1e-15)


class TestDcovCore:
    def test_all_pairs_identical(self):
        pairs = [[0.3, -0.2]] * 6
        assert dcov_core(pairs, standard=False) == 0.0

    def test_equal_x_coordinates(self, rng):
        ys = rng.normal(size=6)
        pairs = [[1.0, y] for y in ys]
        assert dcov_core(pairs, standard=False) == 0.0

    def test_displayed_variant_hand_value(self):
        pairs = [[0, 0], [1, 1], [0, 0], [1, 1], [0.4, 0.9], [0.8, 0.1]]
        assert dcov_core(pairs, standard=False) == pytest.approx(4.0, abs=0)

    def test_variants_disagree_when_positions_5_6_matter(self):
        pairs = [[0, 0], [1, 1], [0, 0], [1, 1], [0, 5], [1, -3]]
        displayed = dcov_core(pairs, standard=False)
        standard = dcov_core(pairs, standard=True)
        assert displayed != standard

    def test_six_pairs_required(self):
        with pytest.raises(ValueError):
            dcov_core([[0.0, 0.0]] * 5)


class TestDcovKernel:
    def test_all_identical_gives_zero(self):
        k = dcov_kernel()
        p = [0.7, -0.1]
        assert k(p, p, p, p, p, p) == 0.0

    def test_permutation_invariance(self, rng):
        k = dcov_kernel()
        pts = rng.normal(size=(6, 2))
        base = k(*pts)
        for _ in range(10):
            perm = rng.permutation(6)
            assert k(*pts[perm]) == pytest.approx(base, rel=1e-12)

    def test_matches_brute_force_permutation_average(self, rng):
        # independent oracle: enumerate all 720 orderings with itertools and
        # average the scalar core
        for variant in (True, False):
            k = dcov_kernel(standard=variant)
            for _ in range(10):
                pairs = rng.normal(size=(6, 2))
                expected = (
                    sum(
                        dcov_core([pairs[i] for i in perm], standard=variant)
                        for perm in itertools.permutations(range(6))
                    )
                    / math.factorial(6)
                )
                got = k(*pairs)
                assert got == pytest.approx(expected, rel=1e-12, abs=1e-14)

    def test_sampling_core_matches_scalar_core(self, rng):
        k = dcov_kernel(standard=True)
        pairs = rng.normal(size=(5, 6, 2))
        core_vals = k.sampling_core(pairs)
        for row, val in zip(pairs, core_vals):
            assert dcov_core(list(row), standard=True) == pytest.approx(float(val), rel=1e-12)


class TestIndicatorProductKernel:
    def test_full_space_is_one(self, rng):
        box = Box(((-math.inf, math.inf),))
        k = indicator_product_kernel([box, box])
        vals = k.eval_tuples(rng.normal(size=(50, 2, 1)))
        assert np.all(vals == 1.0)

    def test_disjoint_box_is_zero(self, rng):
        k = indicator_product_kernel([Box(((100.0, 101.0),))])
        vals = k.eval_tuples(rng.normal(size=(50, 1, 1)))
        assert np.all(vals == 0.0)

    def test_position_membership(self):
        k = indicator_product_kernel([Box(((0.0, 1.0),)), Box(((1.0, 2.0),))])
        assert k(0.5, 1.5) == 1.0
        assert k(1.5, 0.5) == 0.0

    def test_closed_open_boundaries(self):
        k = indicator_product_kernel([Box(((0.0, 1.0),))])
        assert k(0.0) == 1.0
        assert k(1.0) == 0.0

    def test_symmetric_iff_boxes_identical(self):
        same = Box(((0.0, 1.0),))
        other = Box(((1.0, 2.0),))
        assert indicator_product_kernel([same, same]).symmetric
        assert not indicator_product_kernel([same, other]).symmetric

    def test_values_are_binary_products(self, rng):
        boxes = [Box(((-1.0, 0.5),)), Box(((0.0, 2.0),))]
        k = indicator_product_kernel(boxes)
        pts = rng.normal(size=(300, 2, 1))
        vals = k.eval_tuples(pts)
        assert set(np.unique(vals)).issubset({0.0, 1.0})
        manual = boxes[0].contains(pts[:, 0, :]) & boxes[1].contains(pts[:, 1, :])
        np.testing.assert_array_equal(vals, manual.astype(float))

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ConfigurationError):
            indicator_product_kernel([Box(((0.0, 1.0),)), Box(((0.0, 1.0), (0.0, 1.0)))])


class TestPolynomialProductKernel:
    def test_product_structure(self):
        k = polynomial_product_kernel(2, [1.0, 2.0])  # p(x) = 1 + 2x
        assert k(1.0, 2.0) == pytest.approx((1 + 2) * (1 + 4), rel=1e-15)

    def test_limit_hook_squared_mean(self):
        k = polynomial_product_kernel(2, [0.0, 1.0])
        model = RandomMeasureModel(Normal(3.0, 1.0))
        assert k.analytic_limit(model) == pytest.approx(9.0, rel=1e-15)

    def test_limit_hook_uniform_moments(self):
        # p(x) = x^2 under Uniform(0,1): E p = 1/3, squared for order 2
        k = polynomial_product_kernel(2, [0.0, 0.0, 1.0])
        model = RandomMeasureModel(Uniform(0.0, 1.0))
        assert k.analytic_limit(model) == pytest.approx((1 / 3) ** 2, rel=1e-14)


class TestTableKernel:
    def test_step_lookup(self):
        k = table_kernel(1, [0.0], [-1.0, 1.0])
        assert k(-0.5) == -1.0
        assert k(0.5) == 1.0
        assert k(0.0) == 1.0  # cells are closed-open

    def test_symmetry_detection(self):
        sym = table_kernel(2, [0.0], [[1.0, 2.0], [2.0, 3.0]])
        asym = table_kernel(2, [0.0], [[1.0, 2.0], [5.0, 3.0]])
        assert sym.symmetric
        assert not asym.symmetric

    def test_limit_matches_monte_carlo(self):
        k = table_kernel(2, [0.0, 1.0], [[0.0, 1.0, 2.0], [1.0, 0.5, 0.0], [2.0, 0.0, 1.0]])
        model = RandomMeasureModel(Normal(0.5, 1.0))
        closed = estimate_limit(model, k)
        assert closed.method == "exact_box"
        mc = estimate_limit(model, k.replace(analytic_limit=None), mc_samples=200_000, seed=3)
        assert abs(closed.value - mc.value) <= 4 * mc.std_error

    def test_bad_shape_rejected(self):
        with pytest.raises(ConfigurationError):
            table_kernel(2, [0.0], [[1.0, 2.0]])


class TestRegistry:
    def test_symmetry3_lookup(self):
        k = build_kernel(KernelSpec("symmetry3"))
        assert k.order == 3 and k.symmetric

    def test_indicator_lookup(self):
        spec = KernelSpec("indicator", {"boxes": (Box(((0.0, 1.0),)), Box(((0.0, 1.0),)))})
        k = build_kernel(spec)
        assert k.order == 2

    def test_unknown_name_lists_registry(self):
        with pytest.raises(ConfigurationError) as err:
            build_kernel(KernelSpec("nope"))
        message = str(err.value)
        assert "unknown kernel" in message
        for name in registered_kernels():
            assert name in message

    def test_missing_parameter_names_field(self):
        with pytest.raises(ConfigurationError, match="kernel.coefficients"):
            build_kernel(KernelSpec("polynomial-product", {"order": 2}))

    def test_dcov_variants_registered(self):
        assert build_kernel(KernelSpec("dcov6")).name == "dcov6"
        assert build_kernel(KernelSpec("dcov6-standard")).name == "dcov6-standard"

    def test_dcov_independence_limit_hook(self):
        k = build_kernel(KernelSpec("dcov6-standard"))
        model = RandomMeasureModel(ProductLaw((Normal(0, 1), Normal(0, 1))))
        assert k.analytic_limit(model) == 0.0
        assert k.analytic_limit(RandomMeasureModel(Normal(0, 1))) is None
