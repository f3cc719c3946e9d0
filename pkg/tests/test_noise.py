import numpy as np
import pytest

from approx import best_l2
from errors import DegenerateInputError, ParameterError
from hermite import HermiteExpansion
from noise import (
    CorrelatedPairSampler,
    TrigPolynomial,
    bk_identity_check,
    chebyshev_circle_interpolate,
    circle_constants,
    circle_fourier,
    circle_symmetrization_check,
    crossing_closed_form,
    derivative_bound_check,
    filtering_identity_check,
    gns_estimate,
    gns_intersection_scan,
    halfspace_gns_closed_form,
    polynomial_sign,
    ptf_gns_sanity,
    structural_inequality_check,
)
from targets import make_target


class TestCorrelatedPairs:

    def test_coordinate_correlation(self):
        sampler = CorrelatedPairSampler(0.3, 2, seed=3)
        estimate = sampler.coordinate_correlation(50_000)
        assert estimate.within(0.7)

    def test_zero_noise_copies_points(self):
        x, y = CorrelatedPairSampler(0.0, 3, seed=1).sample(100)
        np.testing.assert_array_equal(x, y)

    def test_chunks_are_reproducible(self):
        a = CorrelatedPairSampler(0.2, 2, seed=8).sample(3_000)
        b = CorrelatedPairSampler(0.2, 2, seed=8).sample(3_000)
        np.testing.assert_array_equal(a[1], b[1])

    @pytest.mark.parametrize("rho", [-0.1, 2.0])
    def test_rho_out_of_range(self, rho):
        with pytest.raises(ParameterError):
            CorrelatedPairSampler(rho, 1, seed=0)


class TestNoiseSensitivity:

    def test_closed_forms(self):
        assert halfspace_gns_closed_form(0.0) == 0.0
        assert halfspace_gns_closed_form(1.0) == pytest.approx(0.5)
        # 过原点时越界概率是半空间噪声敏感度的一半
        assert crossing_closed_form(0.0, 0.2) == pytest.approx(0.5 * halfspace_gns_closed_form(0.2), abs=1e-4)

    def test_halfspace_estimate(self, sign):
        estimate = gns_estimate(sign, 0.1, 100_000, seed=2)
        assert estimate.within(halfspace_gns_closed_form(0.1))

    def test_real_target_rejected(self):
        with pytest.raises(ParameterError):
            gns_estimate(make_target("relu"), 0.1, 1_000, seed=0)

    def test_intersection_scan(self):
        rows = gns_intersection_scan([2, 4], 0.05, 50_000, seed=4)
        assert [row.k for row in rows] == [2, 4]
        for row in rows:
            assert abs(row.crossing - row.crossing_exact) <= 5 * row.crossing_se + 1e-4
            assert 0.0 < row.gns < 1.0
        assert set(rows[0].to_row()) >= {"gns", "se", "crossing_exact"}

    def test_intersection_scan_validation(self):
        with pytest.raises(ParameterError):
            gns_intersection_scan([1, 2], 0.05, 1_000, seed=0)
        with pytest.raises(ParameterError):
            gns_intersection_scan([2], 0.5, 1_000, seed=0)

    def test_polynomial_sign_lifts_dimension(self):
        p = HermiteExpansion.univariate([0.0, 1.0])
        f = polynomial_sign(p, 3)
        assert f.dimension == 3
        np.testing.assert_array_equal(f(np.array([[-1.0, 5.0, 5.0], [0.0, -5.0, -5.0]])), [-1.0, 1.0])
        with pytest.raises(ParameterError):
            polynomial_sign(HermiteExpansion(2, 1, {(1, 0): 1.0}), 1)

    def test_structural_inequality(self, rule200, sign):
        p = best_l2(sign, 3, rule200).polynomial
        check = structural_inequality_check(sign, p, 0.05, 50_000, seed=6)
        assert check.lhs_std_error == 0.0
        assert check.holds

    def test_ptf_sanity_rows(self):
        rows = ptf_gns_sanity(3, [0.01, 0.04], 2, 5_000, seed=1)
        assert len(rows) == 4
        assert {row["poly"] for row in rows} == {0, 1}


class TestTrigPolynomials:

    def test_from_cosines(self):
        p = TrigPolynomial.from_cosines([1.0, 2.0])
        theta = np.linspace(0, 2 * np.pi, 9)
        np.testing.assert_allclose(p(theta), 1 + 2 * np.cos(theta), atol=1e-14)
        assert p.is_real

    def test_even_coefficient_count(self):
        with pytest.raises(ParameterError):
            TrigPolynomial(np.ones(4))

    def test_fourier_recovers_coefficients(self):
        p = TrigPolynomial.random_real(3, seed=5)
        recovered = circle_fourier(p, 3)
        np.testing.assert_allclose(recovered.coefficients, p.coefficients, atol=1e-13)

    def test_too_few_points(self):
        with pytest.raises(ParameterError):
            circle_fourier(TrigPolynomial.from_cosines([1.0]), 10, points=40)

    def test_derivative(self):
        p = TrigPolynomial.from_cosines([0.0, 1.0])
        theta = np.linspace(0, 2 * np.pi, 7)
        np.testing.assert_allclose(p.derivative(1)(theta), -np.sin(theta), atol=1e-14)

    @pytest.mark.parametrize("k", [0, 1, 3])
    def test_derivative_bound(self, k):
        assert derivative_bound_check(TrigPolynomial.random_real(4, seed=2), k).holds


class TestCircleInterpolation:

    def test_constants(self):
        assert circle_constants(100)[0] == 13
        assert circle_constants(100)[1] == pytest.approx(0.1 * np.log(100) / 100)
        with pytest.raises(ParameterError):
            circle_constants(1)

    def test_interpolant_reproduces_polynomial(self):
        q = chebyshev_circle_interpolate(lambda z: z ** 3 - z, 0.5, 0.2, 3)
        assert q.leading == pytest.approx(1.0, rel=1e-10)
        z = np.linspace(-0.3, 0.7, 5)
        np.testing.assert_allclose(q(z), z ** 3 - z, atol=1e-12)

    def test_bk_identity(self):
        q = chebyshev_circle_interpolate(np.cos, 0.3, 0.1, 5)
        result = bk_identity_check(q, 0.3, 0.1, 5)
        assert result.equal
        assert result.predicted == pytest.approx((0.15 ** 5) * q.leading)

    def test_filtering_identity(self):
        q = chebyshev_circle_interpolate(np.sin, 0.4, -0.2, 7)
        assert filtering_identity_check(q, 0.4, -0.2, 7).holds

    def test_degenerate_nodes(self):
        with pytest.raises(DegenerateInputError):
            chebyshev_circle_interpolate(np.cos, 0.0, 0.0, 3)
        with pytest.raises(ParameterError):
            chebyshev_circle_interpolate(np.cos, 0.3, 0.0, 4)

    def test_symmetrization_inequality(self, rule200, sign):
        p = best_l2(sign, 5, rule200).polynomial
        check = circle_symmetrization_check(sign, p, 5, 40, seed=3, points=512)
        assert check.holds
        assert check.k == circle_constants(5)[0]

    def test_symmetrization_rejects_high_degree(self, rule200, sign):
        p = best_l2(sign, 5, rule200).polynomial
        with pytest.raises(ParameterError):
            circle_symmetrization_check(sign, p, 3, 10, seed=0)
