import math

import numpy as np
import pytest

from ustatlab.core import ConfigurationError
from ustatlab.processes import (
    IID,
    Exponential,
    GaussianAR1,
    GaussianLinear,
    Mixture,
    Normal,
    PairedIndependent,
    Uniform,
    autocovariance,
    cesaro_absolute_autocovariance,
    covariance_matrix,
    marginal_law,
    min_covariance_determinant,
    simulate,
)

AR = GaussianAR1(mean=0.0, rho=0.5, sigma=1.0)
MIX = Mixture((0.5, 0.5), (IID(Normal(1.0, 1.0)), IID(Normal(3.0, 1.0))))


class TestSimulateDeterminism:
    @pytest.mark.parametrize(
        "spec",
        [
            IID(Normal(0, 1)),
            IID(Uniform(0, 1)),
            IID(Exponential(2.0)),
            AR,
            GaussianLinear((1.0, 0.5, 0.25)),
            MIX,
            PairedIndependent(IID(Normal(0, 1)), IID(Normal(0, 1))),
        ],
    )
    def test_bit_identical_paths(self, spec):
        a = simulate(spec, 40, seed=123)
        b = simulate(spec, 40, seed=123)
        assert np.array_equal(a.points, b.points)
        assert a.latent_component == b.latent_component

    def test_different_seeds_differ(self):
        a = simulate(AR, 40, seed=1)
        b = simulate(AR, 40, seed=2)
        assert not np.array_equal(a.points, b.points)

    def test_iid_repeated_calls(self):
        spec = IID(Normal(0, 1))
        a = simulate(spec, 5, seed=7)
        b = simulate(spec, 5, seed=7)
        assert np.array_equal(a.points, b.points)


class TestLatentComponent:
    def test_degenerate_weights_pin_component(self):
        spec = Mixture((1.0, 0.0), (IID(Normal(1, 1)), IID(Normal(3, 1))))
        for seed in range(25):
            assert simulate(spec, 3, seed).latent_component == 0

    def test_latent_present_iff_mixture(self):
        assert simulate(MIX, 3, 5).latent_component is not None
        assert simulate(AR, 3, 5).latent_component is None

    def test_latent_frequencies_match_weights(self):
        spec = Mixture((0.3, 0.7), (IID(Normal(0, 1)), IID(Normal(5, 1))))
        draws = np.array([simulate(spec, 1, seed).latent_component for seed in range(10_000)])
        freq = np.mean(draws == 0)
        se = math.sqrt(0.3 * 0.7 / draws.size)
        assert abs(freq - 0.3) <= 4 * se

    def test_whole_path_from_one_component(self):
        spec = Mixture((0.5, 0.5), (IID(Normal(-50, 0.1)), IID(Normal(50, 0.1))))
        for seed in range(10):
            path = simulate(spec, 30, seed)
            center = -50 if path.latent_component == 0 else 50
            assert np.all(np.abs(path.points[:, 0] - center) < 5)


class TestAR1:
    def test_lag1_sample_autocovariance(self):
        path = simulate(AR, 100_000, seed=9)
        x = path.points[:, 0]
        sample = float(np.mean(x[:-1] * x[1:]) - np.mean(x) ** 2)
        assert abs(sample - 0.5 / (1 - 0.25)) < 0.02

    def test_marginal_is_exact_stationary_law(self):
        # mean/variance of X_1 agree with X_n over replicates (4 SE)
        first, last = [], []
        for seed in range(10_000):
            pts = simulate(AR, 30, seed).points[:, 0]
            first.append(pts[0])
            last.append(pts[-1])
        first, last = np.asarray(first), np.asarray(last)
        c = AR.stationary_variance
        for sample in (first, last):
            se_mean = math.sqrt(c / sample.size)
            assert abs(sample.mean()) <= 4 * se_mean
            se_var = c * math.sqrt(2.0 / sample.size)
            assert abs(sample.var() - c) <= 4 * se_var

    def test_rho_validation_names_field(self):
        with pytest.raises(ConfigurationError, match="rho"):
            GaussianAR1(rho=1.2)


class TestAutocovariance:
    def test_iid_lag_one_is_zero(self):
        assert autocovariance(IID(Normal(0, 1)), 1) == 0.0

    def test_ar1_closed_form(self):
        c = AR.stationary_variance
        for lag in range(5):
            assert autocovariance(AR, lag) == pytest.approx(0.5**lag * c, rel=1e-15)

    def test_lag_zero_is_marginal_variance(self):
        assert autocovariance(IID(Uniform(0, 2)), 0) == pytest.approx(4 / 12, rel=1e-15)
        assert autocovariance(AR, 0) == pytest.approx(4 / 3, rel=1e-15)

    def test_gaussian_linear_convolution(self):
        spec = GaussianLinear((1.0, 0.5))
        assert autocovariance(spec, 0) == pytest.approx(1.25, rel=1e-15)
        assert autocovariance(spec, 1) == pytest.approx(0.5, rel=1e-15)
        assert autocovariance(spec, 2) == 0.0

    def test_mixture_directs_to_components(self):
        with pytest.raises(ValueError, match="components"):
            autocovariance(MIX, 1)


class TestCesaro:
    def test_iid_is_zero(self):
        for n in (1, 10, 100):
            assert cesaro_absolute_autocovariance(IID(Normal(0, 1)), n) == 0.0

    def test_ar1_geometric_bound_at_100(self):
        c = AR.stationary_variance
        value = cesaro_absolute_autocovariance(AR, 100)
        # geometric series: (c/N) * rho (1 - rho^N) / (1 - rho) <= c/N for rho = 1/2
        assert value <= c / 50
        assert value == pytest.approx((c / 100) * (0.5 * (1 - 0.5**100) / 0.5), rel=1e-12)

    def test_monotone_decreasing_against_direct_sums(self):
        direct = [
            sum(abs(autocovariance(AR, i)) for i in range(1, n + 1)) / n for n in range(1, 60)
        ]
        values = [cesaro_absolute_autocovariance(AR, n) for n in range(1, 60)]
        np.testing.assert_allclose(values, direct, rtol=1e-13)
        assert all(b <= a for a, b in zip(values, values[1:]))


class TestCovarianceMatrix:
    def test_single_index(self):
        mat = covariance_matrix(AR, (1,))
        assert mat.shape == (1, 1)
        assert mat[0, 0] == pytest.approx(4 / 3, rel=1e-15)

    def test_ar1_adjacent_pair(self):
        c = AR.stationary_variance
        mat = covariance_matrix(AR, (1, 2))
        np.testing.assert_allclose(mat, [[c, 0.5 * c], [0.5 * c, c]], rtol=1e-15)

    def test_symmetric_constant_diagonal(self):
        mat = covariance_matrix(AR, (2, 5, 11, 12))
        np.testing.assert_array_equal(mat, mat.T)
        assert np.all(mat.diagonal() == mat[0, 0])

    def test_positive_semidefinite(self):
        for spec in (AR, GaussianLinear((1.0, -0.4, 0.2)), IID(Normal(0, 1))):
            mat = covariance_matrix(spec, (1, 3, 4, 9))
            assert np.linalg.eigvalsh(mat).min() >= -1e-10

    def test_non_increasing_indices_rejected(self):
        with pytest.raises(ValueError):
            covariance_matrix(AR, (3, 3))


class TestMinCovarianceDeterminant:
    def test_iid_normal_identity(self):
        assert min_covariance_determinant(IID(Normal(0, 1)), 3, 10) == pytest.approx(1.0, rel=1e-12)

    def test_ar1_closed_form_minimum(self):
        c = AR.stationary_variance
        got = min_covariance_determinant(AR, 2, 64)
        assert got == pytest.approx(c * c * (1 - 0.25), rel=1e-12)

    def test_positive_for_all_scanned_lags(self):
        # det of the 2x2 block at gap g is c^2 (1 - rho^(2g)) > 0
        assert min_covariance_determinant(AR, 2, 32) > 0
        for g in (1, 2, 7):
            det = float(np.linalg.det(covariance_matrix(AR, (0, g))))
            c = AR.stationary_variance
            assert det == pytest.approx(c * c * (1 - 0.5 ** (2 * g)), rel=1e-12)


class TestPairedIndependent:
    def test_pair_split_recorded(self):
        path = simulate(PairedIndependent(IID(Normal(0, 1)), IID(Normal(0, 1))), 10, 3)
        assert path.pair_split == 1
        assert path.dim == 2

    def test_cross_correlation_near_zero(self):
        path = simulate(PairedIndependent(IID(Normal(0, 1)), IID(Normal(0, 1))), 100_000, 17)
        x, y = path.points[:, 0], path.points[:, 1]
        n = len(x)
        for lag in range(6):
            xs = x[: n - lag] if lag else x
            ys = y[lag:] if lag else y
            corr = float(np.corrcoef(xs, ys)[0, 1])
            assert abs(corr) <= 4 / math.sqrt(len(xs))

    def test_mixture_component_rejected(self):
        with pytest.raises(ConfigurationError):
            PairedIndependent(MIX, IID(Normal(0, 1)))


class TestSpecValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ConfigurationError, match="weights"):
            Mixture((0.5, 0.6), (IID(Normal(0, 1)), IID(Normal(1, 1))))

    def test_nested_mixture_rejected(self):
        with pytest.raises(ConfigurationError):
            Mixture((0.5, 0.5), (MIX, IID(Normal(0, 1))))

    def test_empty_coefficients_rejected(self):
        with pytest.raises(ConfigurationError, match="coefficients"):
            GaussianLinear(())

    def test_marginal_law_of_gaussian_specs(self):
        law = marginal_law(AR)
        assert isinstance(law, Normal)
        assert law.variance == pytest.approx(4 / 3, rel=1e-15)
        law2 = marginal_law(GaussianLinear((3.0, 4.0), mean=1.0))
        assert law2.mean == 1.0
        assert law2.variance == pytest.approx(25.0, rel=1e-15)

    def test_mixture_has_no_single_marginal(self):
        with pytest.raises(ValueError):
            marginal_law(MIX)


class TestMarginalLawMoments:
    def test_normal_raw_moments(self):
        law = Normal(2.0, 3.0)
        # E[X] = 2, E[X^2] = 4 + 9, E[X^3] = mu^3 + 3 mu sigma^2
        assert law.raw_moment(0) == 1.0
        assert law.raw_moment(1) == pytest.approx(2.0)
        assert law.raw_moment(2) == pytest.approx(13.0)
        assert law.raw_moment(3) == pytest.approx(8.0 + 3 * 2 * 9)
        assert law.raw_moment(4) == pytest.approx(16 + 6 * 4 * 9 + 3 * 81)

    def test_uniform_raw_moments(self):
        law = Uniform(0.0, 1.0)
        for k in range(6):
            assert law.raw_moment(k) == pytest.approx(1 / (k + 1), rel=1e-15)

    def test_exponential_raw_moments(self):
        law = Exponential(2.0, shift=0.0)
        assert law.raw_moment(1) == pytest.approx(0.5)
        assert law.raw_moment(2) == pytest.approx(2 / 4)

    def test_sampled_moments_agree(self, rng):
        for law in (Normal(1.0, 2.0), Uniform(-1.0, 3.0), Exponential(1.5, shift=0.5)):
            draws = law.sample(np.random.default_rng(5), 200_000)[:, 0]
            for k in (1, 2, 3):
                sample_moment = float(np.mean(draws**k))
                se = float(np.std(draws**k)) / math.sqrt(draws.size)
                assert abs(sample_moment - law.raw_moment(k)) <= 5 * se

    def test_box_probability_closed_form(self):
        from ustatlab.kernels import Box

        assert Normal(0, 1).box_probability(Box(((-math.inf, 0.0),))) == pytest.approx(0.5)
        assert Uniform(0, 1).box_probability(Box(((0.2, 0.5),))) == pytest.approx(0.3)
        assert Exponential(1.0).box_probability(Box(((0.0, math.inf),))) == pytest.approx(1.0)
