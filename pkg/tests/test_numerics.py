import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from coprimary import (
    CorrelationMatrix,
    QuantileRequest,
    SingularMatrixError,
    StatisticKind,
    bivariate_normal_cdf,
    calibrated_quantile,
    empirical_quantile,
    mvn_sample,
    regularize_and_factor,
    std_normal_cdf,
    std_normal_quantile,
)


class TestStdNormal:
    def test_cdf_values(self):
        assert std_normal_cdf(0.0) == pytest.approx(0.5, abs=1e-12)
        assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
        assert std_normal_cdf(-8.0) < 1e-15

    def test_quantile_values(self):
        assert std_normal_quantile(0.5) == pytest.approx(0.0, abs=1e-12)
        assert std_normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-5)
        assert std_normal_quantile(0.9975) == pytest.approx(2.807034, abs=1e-5)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.3])
    def test_quantile_domain(self, p):
        with pytest.raises(ValueError):
            std_normal_quantile(p)

    def test_mutual_inverses_on_grid(self):
        for p in np.arange(0.001, 1.0, 0.001):
            assert std_normal_cdf(std_normal_quantile(p)) == pytest.approx(p, abs=1e-8)

    def test_vectorized(self):
        x = np.array([-1.0, 0.0, 2.0])
        out = std_normal_cdf(x)
        assert out.shape == (3,)
        np.testing.assert_allclose(std_normal_quantile(out), x, atol=1e-9)


class TestBivariateNormalCdf:
    def test_independence_zero(self):
        assert bivariate_normal_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-12)

    def test_comonotone_limit(self):
        expected = std_normal_cdf(-0.1)
        assert bivariate_normal_cdf(0.3, -0.1, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_orthant_closed_form(self):
        # Phi2(0, 0, rho) = 1/4 + arcsin(rho) / (2 pi)
        for rho in (-0.95, -0.5, 0.0, 0.3, 0.5, 0.8, 0.99):
            expected = 0.25 + math.asin(rho) / (2.0 * math.pi)
            assert bivariate_normal_cdf(0.0, 0.0, rho) == pytest.approx(expected, abs=1e-7)

    def test_independence_factorizes(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x, y = rng.uniform(-3, 3, 2)
            expected = std_normal_cdf(x) * std_normal_cdf(y)
            assert bivariate_normal_cdf(x, y, 0.0) == pytest.approx(expected, abs=1e-9)

    def test_against_scipy_grid(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            x, y = rng.uniform(-4, 4, 2)
            rho = rng.uniform(-0.999, 0.999)
            ref = multivariate_normal([0, 0], [[1, rho], [rho, 1]]).cdf([x, y])
            assert bivariate_normal_cdf(x, y, rho) == pytest.approx(ref, abs=1e-7)

    def test_monotone_in_rho_at_origin(self):
        values = [bivariate_normal_cdf(0.0, 0.0, rho) for rho in np.linspace(-1, 1, 41)]
        assert np.all(np.diff(values) >= 0)

    def test_rho_domain(self):
        with pytest.raises(ValueError):
            bivariate_normal_cdf(0.0, 0.0, 1.5)


class TestRegularizeAndFactor:
    def test_identity(self):
        factor = regularize_and_factor(CorrelationMatrix.identity(3), eps0=1e-4)
        assert factor.eps == 1e-4
        np.testing.assert_allclose(factor.lower, np.eye(3), atol=1e-12)

    def test_perfect_correlation_regularized(self):
        R = CorrelationMatrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
        factor = regularize_and_factor(R, eps0=1e-4)
        assert factor.eps == 1e-4
        reconstructed = factor.lower @ factor.lower.T
        np.testing.assert_allclose(
            reconstructed, np.array([[1.0, 0.9999], [0.9999, 1.0]]), atol=1e-12
        )

    def test_indefinite_needs_larger_eps(self):
        # equicorrelation -0.51 in 3x3 has eigenvalue 1 - 2*0.51 = -0.02,
        # fixable only by the last escalation step
        R = CorrelationMatrix.equicorrelated(3, -0.51)
        factor = regularize_and_factor(R, eps0=1e-4)
        assert factor.eps > 1e-4
        target = (1.0 - factor.eps) * R.entries + factor.eps * np.eye(3)
        np.testing.assert_allclose(factor.lower @ factor.lower.T, target, atol=1e-12)

    def test_unfixable_raises(self):
        # eigenvalue 1 - 2*0.9 = -0.8 would need eps > 0.8/1.8, beyond the 0.1 cap
        R = CorrelationMatrix.equicorrelated(3, -0.9)
        with pytest.raises(SingularMatrixError):
            regularize_and_factor(R, eps0=1e-4)

    def test_correlation_matrix_invariants(self):
        with pytest.raises(ValueError):
            CorrelationMatrix(np.array([[1.0, 0.5], [0.4, 1.0]]))  # asymmetric
        with pytest.raises(ValueError):
            CorrelationMatrix(np.array([[0.9, 0.0], [0.0, 1.0]]))  # bad diagonal
        with pytest.raises(ValueError):
            CorrelationMatrix(np.array([[1.0, 1.2], [1.2, 1.0]]))  # out of range


class TestMvnSample:
    def test_standard_moments(self):
        factor = regularize_and_factor(CorrelationMatrix.identity(3))
        draws = mvn_sample(factor, 40_000, seed=5)
        bound = 4.0 / math.sqrt(40_000)
        assert np.all(np.abs(draws.mean(axis=0)) < bound)
        assert np.all(np.abs(draws.var(axis=0) - 1.0) < 4 * bound)

    def test_correlation_recovered(self):
        R = CorrelationMatrix(np.array([[1.0, 0.8], [0.8, 1.0]]))
        draws = mvn_sample(regularize_and_factor(R), 100_000, seed=6)
        assert np.corrcoef(draws.T)[0, 1] == pytest.approx(0.8, abs=0.01)

    def test_deterministic(self):
        factor = regularize_and_factor(CorrelationMatrix.identity(2))
        a = mvn_sample(factor, 1000, seed=9)
        b = mvn_sample(factor, 1000, seed=9)
        np.testing.assert_array_equal(a, b)


class TestCalibratedQuantile:
    def test_dim1_reduces_to_univariate(self):
        R = CorrelationMatrix.identity(1)
        c = calibrated_quantile(R, QuantileRequest(level=0.975, mc_draws=100_000, seed=7))
        assert c == pytest.approx(1.95996, abs=0.02)

    def test_max_all_independent_closed_form(self):
        # P(max of 2 iid normals <= c) = Phi(c)^2 = 0.95
        R = CorrelationMatrix.identity(2)
        c = calibrated_quantile(R, QuantileRequest(level=0.95, mc_draws=100_000, seed=7))
        assert c == pytest.approx(std_normal_quantile(math.sqrt(0.95)), abs=0.02)

    def test_max_min_pairs_independent_closed_form(self):
        # one pair: (1 - Phi(c))^2 = 0.025
        R = CorrelationMatrix.identity(2)
        req = QuantileRequest(
            level=0.975, statistic_kind=StatisticKind.MAX_MIN_PAIRS, mc_draws=100_000, seed=7
        )
        expected = std_normal_quantile(1.0 - math.sqrt(0.025))
        assert calibrated_quantile(R, req) == pytest.approx(expected, abs=0.02)

    def test_max_all_monotone_in_correlation(self):
        values = []
        for rho in (0.0, 0.5, 0.9):
            R = CorrelationMatrix.equicorrelated(4, rho)
            values.append(
                calibrated_quantile(R, QuantileRequest(level=0.95, mc_draws=100_000, seed=11))
            )
        assert values[0] >= values[1] - 0.03
        assert values[1] >= values[2] - 0.03

    def test_max_min_below_max_all(self):
        R = CorrelationMatrix.equicorrelated(6, 0.4)
        kw = dict(level=0.95, mc_draws=50_000, seed=13)
        c_pairs = calibrated_quantile(
            R, QuantileRequest(statistic_kind=StatisticKind.MAX_MIN_PAIRS, **kw)
        )
        c_all = calibrated_quantile(R, QuantileRequest(statistic_kind=StatisticKind.MAX_ALL, **kw))
        assert c_pairs <= c_all + 0.03

    def test_bit_reproducible(self):
        R = CorrelationMatrix.equicorrelated(4, 0.3)
        req = QuantileRequest(level=0.9, mc_draws=20_000, seed=21)
        assert calibrated_quantile(R, req) == calibrated_quantile(R, req)

    def test_odd_dimension_rejected_for_pairs(self):
        R = CorrelationMatrix.identity(3)
        req = QuantileRequest(
            level=0.9, statistic_kind=StatisticKind.MAX_MIN_PAIRS, mc_draws=10_000, seed=1
        )
        with pytest.raises(ValueError):
            calibrated_quantile(R, req)

    def test_mc_draws_floor(self):
        with pytest.raises(ValueError):
            QuantileRequest(level=0.9, mc_draws=5000)


class TestEmpiricalQuantile:
    def test_declared_convention(self):
        assert empirical_quantile([0.5, 1.0, 1.5, 2.0], 0.75) == 1.5

    def test_constant_sample(self):
        for level in (0.01, 0.5, 0.99):
            assert empirical_quantile([7.0, 7.0, 7.0], level) == 7.0

    def test_order_statistic_index(self):
        values = np.arange(1, 101, dtype=float)
        assert empirical_quantile(values, 0.975) == 98.0

    def test_unsorted_input(self):
        assert empirical_quantile([2.0, 0.5, 1.5, 1.0], 0.75) == 1.5

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            empirical_quantile([], 0.5)
