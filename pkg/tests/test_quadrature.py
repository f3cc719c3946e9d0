import numpy as np
import pytest
from scipy.special import factorial2

from errors import EvaluationError, ParameterError, ResourceError
from hermite import hermite_table
from quadrature import (
    expect,
    gauss_hermite_rule,
    grid_order,
    make_rng,
    mc_expect,
    standard_normal_sampler,
    tensor_expect,
    tensor_points,
)


def gaussian_moment(j):
    if j % 2:
        return 0.0
    return float(factorial2(j - 1, exact=True)) if j else 1.0


class TestGaussHermiteRule:

    @pytest.mark.parametrize("order", [1, 2, 7, 200, 1000])
    def test_weights_are_probability(self, order):
        rule = gauss_hermite_rule(order)
        assert rule.order == order
        assert np.all(rule.weights > 0)
        np.testing.assert_allclose(rule.weights.sum(), 1.0, atol=1e-13)

    def test_nodes_symmetric_and_sorted(self):
        rule = gauss_hermite_rule(31)
        assert np.all(np.diff(rule.nodes) > 0)
        np.testing.assert_allclose(rule.nodes, -rule.nodes[::-1], atol=1e-14)
        np.testing.assert_allclose(rule.weights, rule.weights[::-1], atol=1e-16)

    def test_exact_for_moments_up_to_2n_minus_1(self):
        rule = gauss_hermite_rule(10)
        for j in range(20):
            value = expect(rule, lambda x, j=j: x ** j)
            np.testing.assert_allclose(value, gaussian_moment(j), rtol=1e-10, atol=1e-11)

    @pytest.mark.parametrize("order", range(1, 41))
    def test_exact_for_hermite_polynomials(self, order):
        rule = gauss_hermite_rule(order)
        # Σ wᵢ H_j(xᵢ)，j = 0..2q−1
        sums = hermite_table(2 * order - 1, rule.nodes, scale=rule.weights).sum(axis=0)
        expected = np.zeros(2 * order)
        expected[0] = 1.0
        np.testing.assert_allclose(sums, expected, atol=1e-9)

    def test_high_order_rule_stays_accurate(self):
        rule = gauss_hermite_rule(1000)
        np.testing.assert_allclose(expect(rule, lambda x: x ** 2), 1.0, rtol=1e-10)
        np.testing.assert_allclose(expect(rule, lambda x: np.cos(x)), np.exp(-0.5), rtol=1e-10)

    @pytest.mark.parametrize("order", [0, 1001, -3])
    def test_order_out_of_range(self, order):
        with pytest.raises(ParameterError):
            gauss_hermite_rule(order)

    def test_grid_order(self):
        assert grid_order(10) == 200
        assert grid_order(100) == 400

    def test_non_finite_integrand(self):
        rule = gauss_hermite_rule(5)
        with pytest.raises(EvaluationError):
            expect(rule, lambda x: np.where(x == 0, np.inf, x))


class TestTensorQuadrature:

    def test_product_moment(self):
        rule = gauss_hermite_rule(5)
        value = tensor_expect(rule, 2, lambda x: x[:, 0] ** 2 * x[:, 1] ** 2)
        np.testing.assert_allclose(value, 1.0, rtol=1e-12)

    def test_rotation_invariance(self):
        rule = gauss_hermite_rule(8)
        angle = 0.3
        u = np.array([np.cos(angle), np.sin(angle)])
        value = tensor_expect(rule, 2, lambda x: (x @ u) ** 4)
        np.testing.assert_allclose(value, 3.0, rtol=1e-12)

    def test_dimension_limit(self):
        with pytest.raises(ParameterError):
            tensor_points(gauss_hermite_rule(3), 5)

    def test_grid_size_limit(self):
        with pytest.raises(ResourceError):
            tensor_points(gauss_hermite_rule(1000), 3)


class TestMonteCarlo:

    def test_reproducible(self):
        sampler = standard_normal_sampler()
        a = mc_expect(sampler, lambda x: x ** 2, 10_000, seed=7)
        b = mc_expect(sampler, lambda x: x ** 2, 10_000, seed=7)
        assert a == b

    def test_estimate_within_standard_errors(self):
        estimate = mc_expect(standard_normal_sampler(3), lambda x: np.sum(x ** 2, axis=1), 50_000, seed=1)
        assert estimate.within(3.0)
        assert estimate.n_samples == 50_000

    def test_chunked_estimate_pools_all_chunks(self):
        drawn = []

        def sampler(rng, n):
            values = rng.standard_normal(n)
            drawn.append(values)
            return values

        estimate = mc_expect(sampler, lambda x: x ** 2, 10_500, seed=3, chunk_size=1_000)
        assert [v.size for v in drawn] == [1_000] * 10 + [500]
        pooled = np.concatenate(drawn) ** 2
        assert estimate.n_samples == 10_500
        assert estimate.mean == pytest.approx(pooled.mean(), rel=1e-12)
        assert estimate.std_error == pytest.approx(pooled.std(ddof=1) / np.sqrt(pooled.size), rel=1e-9)
        assert estimate.within(1.0)
        again = mc_expect(standard_normal_sampler(), lambda x: x ** 2, 10_500, seed=3, chunk_size=1_000)
        assert again == estimate

    def test_chunk_size_must_be_positive(self):
        with pytest.raises(ParameterError):
            mc_expect(standard_normal_sampler(), lambda x: x, 1_000, seed=0, chunk_size=0)

    def test_too_few_samples(self):
        with pytest.raises(ParameterError):
            mc_expect(standard_normal_sampler(), lambda x: x, 10, seed=0)

    def test_streams_are_independent(self):
        a = make_rng(5, 1).standard_normal(4)
        b = make_rng(5, 2).standard_normal(4)
        c = make_rng(5, 1).standard_normal(4)
        assert not np.allclose(a, b)
        np.testing.assert_array_equal(a, c)
