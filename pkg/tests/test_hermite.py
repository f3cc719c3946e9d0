from math import factorial

import numpy as np
import pytest

from errors import ParameterError
from hermite import (
    HermiteExpansion,
    MultiIndex,
    derivative_tensor,
    expand,
    harmonic_inner_product,
    hermite_eval,
    hermite_table,
    hypercontractive_chain,
    lp_norm,
    multi_hermite_eval,
    multi_indices,
    tail_from,
)
from quadrature import expect, gauss_hermite_rule


class TestHermitePolynomials:

    def test_low_degree_closed_forms(self):
        x = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(hermite_eval(0, x), np.ones_like(x))
        np.testing.assert_allclose(hermite_eval(1, x), x)
        np.testing.assert_allclose(hermite_eval(2, x), (x ** 2 - 1) / np.sqrt(2), atol=1e-14)
        np.testing.assert_allclose(hermite_eval(3, x), (x ** 3 - 3 * x) / np.sqrt(6), atol=1e-13)

    def test_scalar_input_returns_float(self):
        assert isinstance(hermite_eval(2, 1.0), float)
        assert hermite_eval(2, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_orthonormal_under_gaussian(self):
        rule = gauss_hermite_rule(60)
        table = hermite_table(20, rule.nodes)
        gram = table.T @ (rule.weights[:, None] * table)
        np.testing.assert_allclose(gram, np.eye(21), atol=1e-12)

    def test_table_shape(self):
        x = np.zeros((4, 3))
        assert hermite_table(5, x).shape == (4, 3, 6)

    def test_negative_degree(self):
        with pytest.raises(ParameterError):
            hermite_eval(-1, 0.5)

    def test_multivariate_product(self):
        x = np.array([[0.5, -1.2], [2.0, 0.3]])
        expected = hermite_eval(2, x[:, 0]) * hermite_eval(1, x[:, 1])
        np.testing.assert_allclose(multi_hermite_eval((2, 1), x), expected)
        with pytest.raises(ParameterError):
            multi_hermite_eval((1, 1, 1), x)


class TestMultiIndices:

    def test_graded_order(self):
        entries = [J.entries for J in multi_indices(2, 2)]
        assert entries == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]

    def test_count_matches_binomial(self):
        from math import comb
        assert len(multi_indices(3, 4)) == comb(3 + 4, 4)

    def test_negative_entry(self):
        with pytest.raises(ParameterError):
            MultiIndex((1, -1))


class TestExpansion:

    def test_sign_coefficients(self, sign):
        e = expand(sign, 1, 9, gauss_hermite_rule(1000))
        # 符号函数只有奇数次系数，一次系数为 √(2/π)
        np.testing.assert_allclose(e.coefficient(1), np.sqrt(2 / np.pi), atol=2e-3)
        for j in (0, 2, 4, 6, 8):
            assert abs(e.coefficient(j)) < 1e-12

    def test_polynomial_is_recovered_exactly(self):
        p = HermiteExpansion.univariate([0.5, 0.0, -1.0, 2.0])
        e = expand(p, 1, 6, gauss_hermite_rule(20))
        np.testing.assert_allclose(e.as_array()[:4], [0.5, 0.0, -1.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(e.as_array()[4:], 0.0, atol=1e-12)

    def test_two_dimensional_expansion(self):
        def f(x):
            return x[:, 0] * x[:, 1]

        e = expand(f, 2, 3, gauss_hermite_rule(10))
        assert e.coefficient((1, 1)) == pytest.approx(1.0, abs=1e-12)
        assert e.l2_norm() == pytest.approx(1.0, abs=1e-12)

    def test_rule_order_too_small(self, sign):
        with pytest.raises(ParameterError):
            expand(sign, 1, 10, gauss_hermite_rule(12))

    def test_coefficient_above_max_degree(self):
        with pytest.raises(ParameterError):
            HermiteExpansion(1, 2, {(3,): 1.0})

    def test_parseval(self, rule200):
        p = HermiteExpansion.univariate([0.3, -0.4, 0.0, 1.1, 0.25])
        direct = np.sqrt(expect(rule200, lambda x: p.evaluate(x) ** 2))
        assert p.l2_norm() == pytest.approx(direct, rel=1e-12)

    def test_tail_and_degree_part(self):
        p = HermiteExpansion.univariate([1.0, 2.0, 3.0, 4.0])
        tail = tail_from(p, 2)
        np.testing.assert_allclose(tail.as_array(), [0.0, 0.0, 3.0, 4.0])
        assert p.degree_part(1).coefficient(1) == 2.0
        assert p.degree_part(1).coefficient(2) == 0.0

    def test_arithmetic(self):
        p = HermiteExpansion.univariate([1.0, 2.0])
        q = HermiteExpansion.univariate([0.0, 2.0, 1.0])
        diff = q - p
        np.testing.assert_allclose(diff.as_array(), [-1.0, 0.0, 1.0])
        assert diff.max_degree == 2

    def test_json_roundtrip(self):
        p = HermiteExpansion(2, 3, {(1, 0): 0.5, (0, 2): -1.5, (2, 1): 2.0})
        restored = HermiteExpansion.from_json(p.to_json())
        assert restored == p

    def test_evaluate_matches_hermite_products(self):
        p = HermiteExpansion(2, 2, {(1, 1): 2.0, (0, 2): 1.0})
        x = np.array([[0.3, -0.7], [1.5, 2.0]])
        expected = 2.0 * x[:, 0] * x[:, 1] + (x[:, 1] ** 2 - 1) / np.sqrt(2)
        np.testing.assert_allclose(p.evaluate(x), expected, atol=1e-13)

    def test_dimension_mismatch(self):
        p = HermiteExpansion(2, 1, {(1, 0): 1.0})
        with pytest.raises(ParameterError):
            p.evaluate(np.zeros((3, 3)))


class TestNorms:

    def test_lp_norm_of_linear_function(self, rule200):
        p = HermiteExpansion.univariate([0.0, 1.0])
        assert lp_norm(p, 1, gauss_hermite_rule(1000)) == pytest.approx(np.sqrt(2 / np.pi), abs=2e-3)
        assert lp_norm(p, 4, rule200) == pytest.approx(3.0 ** 0.25, rel=1e-10)
        with pytest.raises(ParameterError):
            lp_norm(p, 0.5, rule200)

    def test_hypercontractive_chain_holds(self, rule200):
        p = HermiteExpansion.univariate([0.2, -0.5, 0.0, 0.8, 0.1])
        report = hypercontractive_chain(p, rule200)
        assert report.degree == 4
        assert report.holds

    def test_harmonic_identity_for_homogeneous_part(self):
        p = HermiteExpansion(2, 3, {(3, 0): 1.0, (1, 2): 0.5})
        q = HermiteExpansion(2, 3, {(3, 0): -0.4, (2, 1): 1.0, (1, 2): 2.0})
        inner = sum(c * q.coefficient(J) for J, c in p.items())
        assert harmonic_inner_product(p, q, 3) == pytest.approx(6.0 * inner, rel=1e-8)

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_harmonic_identity_for_random_pairs(self, k, m):
        rng = np.random.default_rng(10 * k + m)
        top = [J for J in multi_indices(m, k) if J.total_degree == k]
        p = HermiteExpansion(m, k, {J: float(rng.standard_normal()) for J in top})
        q = HermiteExpansion(m, k, {J: float(rng.standard_normal()) for J in top})
        inner = sum(c * q.coefficient(J) for J, c in p.items())
        scale = factorial(k) * p.l2_norm() * q.l2_norm()
        assert harmonic_inner_product(p, q, k) == pytest.approx(factorial(k) * inner, rel=1e-3,
                                                                 abs=1e-6 * scale)

    def test_derivative_of_quadratic(self):
        # H_2(x) = (x² − 1)/√2，二阶导数为 √2
        p = HermiteExpansion.univariate([0.0, 0.0, 1.0])
        tensor = derivative_tensor(p, 2)
        assert tensor[MultiIndex((2,))] == pytest.approx(np.sqrt(2), rel=1e-10)
