import numpy as np
import pytest

from approx import (
    LinearProgram,
    LpStatus,
    best_l1,
    best_l2,
    continuous_l1_error,
    csq_hard_function,
    degree_profile,
    dual_witness,
    dual_witness_real,
    duality_gap,
    fit_scaling,
    lp_error,
    min_degree,
    solve_lp,
)
from errors import AnalysisError, DegenerateInputError, ParameterError
from hermite import HermiteExpansion
from quadrature import gauss_hermite_rule
from targets import make_target


def small_program():
    return LinearProgram(
        objective=[1.0, 1.0],
        matrix=[[1.0, 2.0], [3.0, 1.0]],
        senses=["<=", "<="],
        rhs=[4.0, 6.0],
        maximize=True,
    )


class TestLinearProgram:

    @pytest.mark.parametrize("method", ["highs", "simplex"])
    def test_small_maximization(self, method):
        solution = solve_lp(small_program(), method)
        assert solution.status == LpStatus.OPTIMAL
        assert solution.optimum == pytest.approx(2.8, abs=1e-9)
        np.testing.assert_allclose(solution.x, [1.6, 1.2], atol=1e-9)

    def test_duals_are_rhs_sensitivities(self):
        solution = solve_lp(small_program(), "highs")
        np.testing.assert_allclose(solution.duals, [0.4, 0.2], atol=1e-9)

    @pytest.mark.parametrize("method", ["highs", "simplex"])
    def test_free_variables_and_equalities(self, method):
        # min |x - 3| 写成 x - r⁺ + r⁻ = 3
        lp = LinearProgram([0.0, 1.0, 1.0], [[1.0, -1.0, 1.0]], ["="], [3.0],
                           bounds=[(None, None), (0.0, None), (0.0, None)])
        solution = solve_lp(lp, method)
        assert solution.optimum == pytest.approx(0.0, abs=1e-9)
        assert solution.x[0] == pytest.approx(3.0, abs=1e-9)

    @pytest.mark.parametrize("method", ["highs", "simplex"])
    def test_infeasible(self, method):
        lp = LinearProgram([1.0], [[1.0]], ["<="], [-1.0])
        assert solve_lp(lp, method).status == LpStatus.INFEASIBLE

    @pytest.mark.parametrize("method", ["highs", "simplex"])
    def test_unbounded(self, method):
        lp = LinearProgram([1.0], [[-1.0]], ["<="], [1.0], maximize=True)
        assert solve_lp(lp, method).status == LpStatus.UNBOUNDED

    def test_malformed_program(self):
        with pytest.raises(ParameterError):
            LinearProgram([1.0, 1.0], [[1.0, 1.0]], ["<"], [1.0])
        with pytest.raises(ParameterError):
            LinearProgram([1.0], [[np.nan]], ["<="], [1.0])
        with pytest.raises(ParameterError):
            solve_lp(small_program(), "interior")


class TestBestApproximation:

    def test_constant_l1_error_of_sign(self, rule200, sign):
        assert best_l1(sign, 0, rule200).error == pytest.approx(1.0, abs=1e-9)

    def test_l2_error_of_sign(self, sign):
        result = best_l2(sign, 2, gauss_hermite_rule(1000))
        assert result.error == pytest.approx(np.sqrt(1 - 2 / np.pi), abs=3e-3)
        assert result.norm == "L2"

    def test_l1_error_decreases_with_degree(self, rule200, sign):
        errors = degree_profile(sign, "L1", 7, rule200)
        assert len(errors) == 8
        assert all(b <= a + 1e-9 for a, b in zip(errors, errors[1:]))
        assert errors[1] < 1.0

    def test_l1_is_below_l2(self, rule200, sign):
        l1 = best_l1(sign, 5, rule200).error
        l2 = best_l2(sign, 5, rule200).error
        assert l1 <= l2 + 1e-9

    @pytest.mark.parametrize("d", [1, 4])
    def test_methods_agree(self, rule200, sign, d):
        a = best_l1(sign, d, rule200, method="highs", tie_break=False).error
        b = best_l1(sign, d, rule200, method="simplex", tie_break=False).error
        assert a == pytest.approx(b, abs=1e-7)

    def test_reported_error_matches_grid_error(self, rule200, sign):
        result = best_l1(sign, 3, rule200)
        assert lp_error(sign, result.polynomial, 1, rule200) == pytest.approx(result.error, abs=1e-9)

    def test_continuous_error_close_to_grid_error(self, rule200, sign):
        result = best_l1(sign, 3, rule200)
        continuous = continuous_l1_error(sign, result.polynomial)
        assert continuous == pytest.approx(result.error, abs=1e-2)

    def test_coarse_rule_rejected(self, sign):
        with pytest.raises(ParameterError):
            best_l1(sign, 3, gauss_hermite_rule(50))

    def test_multivariate_target_rejected_for_l1(self, rule200):
        with pytest.raises(ParameterError):
            best_l1(make_target("sign", dimension=2), 2, rule200)

    def test_min_degree(self, rule200, sign):
        errors = degree_profile(sign, "L2", 20, rule200)
        target = 0.5 * (errors[3] + errors[2])
        d = min_degree(sign, target, "L2", 20, rule200)
        assert errors[d] < target
        assert errors[d - 1] >= target

    def test_min_degree_sentinel(self, rule200, sign):
        assert min_degree(sign, 1e-6, "L2", 5, rule200) == 6

    def test_unknown_norm(self, sign):
        with pytest.raises(ParameterError):
            degree_profile(sign, "L3", 4)


class TestDualWitness:

    @pytest.mark.parametrize("d", [0, 3, 6])
    def test_strong_duality(self, rule200, sign, d):
        assert duality_gap(sign, d, rule200) <= 1e-6

    def test_witness_properties(self, rule200, sign):
        witness = dual_witness(sign, 5, rule200)
        assert np.all(np.abs(witness.values) <= 1.0)
        assert witness.moment_residual <= 1e-8
        assert 0.0 < witness.correlation <= 1.0
        assert witness.opt == pytest.approx(0.5 * (1 - witness.correlation))
        primal = best_l1(sign, 4, rule200, tie_break=False).error
        assert witness.correlation == pytest.approx(primal, abs=1e-6)

    def test_witness_with_simplex(self, rule200, sign):
        a = dual_witness(sign, 3, rule200, method="highs").correlation
        b = dual_witness(sign, 3, rule200, method="simplex").correlation
        assert a == pytest.approx(b, abs=1e-7)

    def test_real_valued_target_rejected(self, rule200):
        with pytest.raises(ParameterError):
            dual_witness(make_target("relu"), 3, rule200)

    def test_real_witness_feasibility(self, rule200):
        relu = make_target("relu")
        report = dual_witness_real(relu, 2, 1e-4, rule200)
        primal = best_l1(relu, 1, rule200, tie_break=False).error
        assert report.optimum == pytest.approx(primal, abs=1e-6)
        assert report.feasible
        assert not report.norm_below_epsilon
        assert not dual_witness_real(relu, 2, 10.0, rule200).feasible

    def test_real_witness_norm_below_epsilon(self, rule200):
        report = dual_witness_real(make_target("relu"), 2, 10.0, rule200)
        assert report.norm_below_epsilon
        assert report.target_l2_norm == pytest.approx(np.sqrt(0.5), abs=1e-3)
        assert report.to_dict()["norm_below_epsilon"] is True
        zero = make_target("custom", evaluator=lambda x: np.zeros(x.shape[0]))
        empty = dual_witness_real(zero, 0, 0.1, rule200)
        assert empty.optimum == pytest.approx(0.0, abs=1e-12)
        assert empty.norm_below_epsilon
        assert not empty.feasible


class TestCsqHardFunction:

    def test_scaled_tail_norm(self, sign):
        hard = csq_hard_function(sign, 3, 0.1, max_degree=15)
        assert hard.G.l2_norm() == pytest.approx(2 / 0.1, rel=1e-9)
        assert all(J.total_degree >= 3 for J, _ in hard.G.items())

    def test_polynomial_target_below_degree_is_degenerate(self):
        p = HermiteExpansion.univariate([1.0, 0.5])
        with pytest.raises(DegenerateInputError):
            csq_hard_function(p, 2, 0.1)


class TestScalingFit:

    def test_recovers_linear_law(self):
        eps = [0.4, 0.2, 0.1, 0.05, 0.025]
        degrees = [int(round(2 * np.log(1 / e) ** 2)) + 1 for e in eps]
        fit = fit_scaling(eps, degrees)
        assert fit.log2_slope == pytest.approx(2.0, rel=0.05)
        assert fit.log2_r_squared > 0.99
        assert fit.loglog_slope == -fit.slope

    def test_requires_four_points_and_span(self):
        with pytest.raises(ParameterError):
            fit_scaling([0.4, 0.2, 0.1], [1, 2, 3])
        with pytest.raises(ParameterError):
            fit_scaling([0.4, 0.35, 0.3, 0.25], [1, 2, 3, 4])

    def test_constant_degrees(self):
        with pytest.raises(AnalysisError):
            fit_scaling([0.4, 0.2, 0.1, 0.05], [3, 3, 3, 3])
