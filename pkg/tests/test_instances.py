import numpy as np
import pytest

from approx import dual_witness, dual_witness_real
from errors import ParameterError, ResourceError
from frames import make_frame
from hermite import HermiteExpansion
from instances import (
    Adversary,
    CorrelationCheck,
    LearnerConfig,
    NullDistribution,
    OracleMode,
    PlantedReal,
    RealScaledLabels,
    SQQuery,
    StatOracle,
    Verdict,
    chi_pairwise,
    conditional_chi_square,
    correlation_bound_check,
    correlation_query,
    csq_oracle,
    distinguish_boolean,
    distinguish_real,
    joint_projection_factor,
    planted_distribution,
    sq_dimension_bound,
    sq_dimension_estimate,
    sq_oracle,
)
from quadrature import gauss_hermite_rule
from targets import make_target


def constant_link(z):
    return np.full(np.asarray(z).shape[0], 0.5)


def sign_link(z):
    return np.where(np.asarray(z)[:, 0] >= 0, 1.0, -1.0)


@pytest.fixture
def frame():
    return make_frame(np.eye(6)[:1])


@pytest.fixture(scope="module")
def witness():
    return dual_witness(make_target("sign"), 3, gauss_hermite_rule(200))


def ones(x):
    return np.ones(np.asarray(x).shape[0])


class TestDistributions:

    def test_null_labels(self):
        x, y = NullDistribution(3).sample(1_000, seed=1)
        assert x.shape == (1_000, 3)
        assert set(np.unique(y)) <= {-1.0, 1.0}
        np.testing.assert_array_equal(NullDistribution(3).conditional_mean(x), 0.0)

    def test_points_do_not_depend_on_distribution(self, frame):
        planted = planted_distribution(constant_link, frame)
        x_null, _ = NullDistribution(6).sample(50, seed=2)
        x_planted, _ = planted.sample(50, seed=2)
        np.testing.assert_array_equal(x_null, x_planted)

    def test_planted_conditional_mean(self, frame, witness):
        planted = planted_distribution(witness, frame)
        x = np.zeros((3, 6))
        x[:, 0] = [-1.0, 0.2, 2.5]
        np.testing.assert_allclose(planted.conditional_mean(x), witness.interpolant(x[:, 0]))
        assert planted.opt == pytest.approx(0.5 * (1 - witness.correlation))
        assert "planted_boolean" in planted.descriptor

    def test_witness_dimension_must_match_frame(self, witness):
        with pytest.raises(ParameterError):
            planted_distribution(witness, make_frame(np.eye(6)[:2]))

    def test_planted_real_labels_are_deterministic(self, frame):
        G = HermiteExpansion(1, 2, {(2,): 3.0})
        dist = PlantedReal(G, frame)
        x, y = dist.sample(20, seed=0)
        np.testing.assert_allclose(y, G.evaluate(x[:, :1]))

    def test_scaled_labels(self, frame):
        base = planted_distribution(constant_link, frame)
        scaled = RealScaledLabels(base, 4.0)
        x, y = scaled.sample(100, seed=3)
        assert set(np.unique(y)) <= {-4.0, 4.0}
        with pytest.raises(ParameterError):
            RealScaledLabels(base, 0.0)


class TestOracle:

    def test_analytic_answer_and_adversary(self, frame):
        planted = planted_distribution(constant_link, frame)
        honest = correlation_query(ones, 0.1, adversary=Adversary.NONE, subspace=frame.matrix)
        assert sq_oracle(planted, honest) == pytest.approx(0.5, abs=1e-12)
        answer = StatOracle().query(planted, correlation_query(ones, 0.1, subspace=frame.matrix))
        assert answer.truth == pytest.approx(0.5, abs=1e-12)
        assert answer.null_value == pytest.approx(0.0, abs=1e-12)
        assert answer.value == pytest.approx(0.4, abs=1e-12)

    def test_null_answer_is_exact(self):
        null = NullDistribution(2)
        assert sq_oracle(null, correlation_query(lambda x: x[:, 0], 0.05)) == pytest.approx(0.0, abs=1e-12)

    def test_empirical_mode(self, frame):
        planted = planted_distribution(constant_link, frame)
        query = correlation_query(ones, 0.1, mode=OracleMode.empirical(20_000, 7),
                                  adversary=Adversary.NONE)
        answer = StatOracle().query(planted, query)
        assert answer.std_error > 0
        assert abs(answer.value - 0.5) <= 5 * answer.std_error

    def test_clamping_is_counted(self, frame):
        planted = planted_distribution(constant_link, frame)
        oracle = StatOracle()
        query = SQQuery(lambda x, y: np.full(y.size, 2.0), 0.5, adversary=Adversary.NONE,
                        subspace=frame.matrix)
        answer = oracle.query(planted, query)
        assert answer.value == pytest.approx(1.0)
        assert oracle.clamp_count > 0

    def test_csq_oracle_with_real_labels(self, frame):
        G = HermiteExpansion(1, 1, {(1,): 3.0})
        dist = PlantedReal(G, frame)
        value = csq_oracle(dist, lambda x: x[:, 0] / 10.0, 0.01, adversary=Adversary.NONE,
                           subspace=frame.matrix)
        assert value == pytest.approx(0.3, abs=1e-10)

    def test_tolerance_range(self):
        with pytest.raises(ParameterError):
            SQQuery(lambda x, y: y, 0.0)
        with pytest.raises(ParameterError):
            OracleMode.empirical(1, 0)

    def test_null_expectation_in_high_dimension(self):
        null = NullDistribution(50)
        direction = np.eye(50)[:1]
        square = SQQuery(lambda x, y: 0.5 * x[:, 0] ** 2, 0.1, adversary=Adversary.NONE, subspace=direction)
        assert sq_oracle(null, square) == pytest.approx(0.5, abs=1e-9)
        labels = SQQuery(lambda x, y: y, 0.1, adversary=Adversary.NONE, subspace=direction)
        assert sq_oracle(null, labels) == pytest.approx(0.0, abs=1e-12)
        answer = StatOracle().query(null, square)
        assert answer.null_value == pytest.approx(answer.truth, abs=1e-12)

    def test_undeclared_query_in_high_dimension(self):
        square = SQQuery(lambda x, y: 0.5 * x[:, 0] ** 2, 0.1, adversary=Adversary.NONE)
        with pytest.raises(ResourceError):
            sq_oracle(NullDistribution(50), square)
        assert sq_oracle(NullDistribution(4), square) == pytest.approx(0.5, abs=1e-9)

    def test_adversarial_answers_stay_within_tolerance(self, frame):
        rng = np.random.default_rng(11)
        distributions = [planted_distribution(sign_link, frame), NullDistribution(6)]
        oracle = StatOracle()
        for _ in range(10_000):
            a, b, c, shift = rng.uniform(-1.0, 1.0, size=4)
            tau = float(rng.uniform(1e-3, 0.5))
            dist = distributions[int(rng.integers(2))]

            def function(x, y, a=a, b=b, c=c, shift=shift):
                return 0.5 * a * y + 0.5 * b * np.tanh(3.0 * c * x[:, 0] + shift)

            answer = oracle.query(dist, SQQuery(function, tau, subspace=frame.matrix))
            assert answer.deviation <= tau + 1e-12
            if abs(answer.null_value - answer.truth) <= tau:
                assert answer.value == pytest.approx(answer.null_value, abs=1e-12)
        assert oracle.clamp_count == 0

    def test_subspace_too_large(self, frame):
        planted = planted_distribution(constant_link, frame)
        rows = np.eye(6)[1:5]
        query = correlation_query(ones, 0.1, subspace=rows)
        with pytest.raises(ResourceError):
            sq_oracle(planted, query)


class TestCorrelation:

    def test_joint_factor_reproduces_covariance(self):
        U = make_frame([[1.0, 0.0, 0.0, 0.0]])
        V = make_frame([[0.6, 0.8, 0.0, 0.0]])
        A = joint_projection_factor(U, V)
        np.testing.assert_allclose(A @ A.T, [[1.0, 0.6], [0.6, 1.0]], atol=1e-12)

    def test_correlation_lemma_is_tight_for_pure_degree(self):
        angle = 0.7
        U = make_frame([[1.0, 0.0, 0.0]])
        V = make_frame([[np.cos(angle), np.sin(angle), 0.0]])
        g = HermiteExpansion.univariate([0.0, 0.0, 1.0])
        check = correlation_bound_check(g, U, V, 2)
        assert check.method == "quadrature"
        assert check.lhs == pytest.approx(np.cos(angle) ** 2, abs=1e-12)
        assert check.holds

    def test_negative_correlation_is_bounded_in_absolute_value(self):
        angle = np.pi - 0.3
        U = make_frame([[1.0, 0.0, 0.0]])
        V = make_frame([[np.cos(angle), np.sin(angle), 0.0]])
        check = correlation_bound_check(HermiteExpansion.univariate([0.0, 0.0, 0.0, 1.0]), U, V, 3)
        assert check.lhs == pytest.approx(np.cos(angle) ** 3, abs=1e-12)
        assert check.lhs < 0
        assert check.holds
        violated = CorrelationCheck(lhs=-1.0, lhs_std_error=0.0, rhs=0.5, spectral=0.5, method="quadrature")
        assert not violated.holds
        assert not violated.to_dict()["holds"]

    def test_low_degree_mass_rejected(self):
        U = make_frame([[1.0, 0.0, 0.0]])
        g = HermiteExpansion.univariate([0.0, 0.5, 1.0])
        with pytest.raises(ParameterError):
            correlation_bound_check(g, U, U, 2)

    def test_chi_on_coincident_frames(self, frame, witness):
        dist = planted_distribution(witness, frame)
        estimate = chi_pairwise(dist, planted_distribution(witness, frame))
        assert estimate.std_error == 0.0
        assert estimate.mean == pytest.approx(witness.second_moment, abs=1e-12)

    def test_conditional_chi_square_of_constant_link(self, frame):
        assert conditional_chi_square(planted_distribution(constant_link, frame)) == pytest.approx(0.0, abs=1e-12)

    def test_sq_dimension(self):
        estimate = sq_dimension_estimate(np.eye(5), 0.1, 1.0)
        assert estimate.valid
        assert estimate.bound == pytest.approx(sq_dimension_bound(5, 0.1, 1.0))
        C = np.eye(3)
        C[0, 1] = C[1, 0] = 0.5
        bad = sq_dimension_estimate(C, 0.1, 1.0)
        assert not bad.valid
        assert bad.bound is None
        assert bad.offending == (0, 1, 0.5)

    def test_sq_dimension_validation(self):
        with pytest.raises(ParameterError):
            sq_dimension_estimate(np.array([[1.0, 0.2], [0.0, 1.0]]), 0.1, 1.0)
        with pytest.raises(ParameterError):
            sq_dimension_bound(3, 1.0, 1.0)


class TestDistinguisher:

    def test_planted_and_null_verdicts(self, frame):
        learner = LearnerConfig(kind="l2", degree=1, n_train=2_000, feature_map=frame)
        planted = planted_distribution(sign_link, frame)
        result = distinguish_boolean(planted, 0.5, learner, seed=1)
        assert result.verdict == Verdict.PLANTED
        assert result.truth > 0.9
        null = distinguish_boolean(NullDistribution(6), 0.5, learner, seed=1)
        assert null.verdict == Verdict.NULL
        assert null.answer == pytest.approx(0.0, abs=1e-12)

    def test_l1_learner(self, frame):
        learner = LearnerConfig(kind="l1", degree=1, n_train=500, feature_map=frame)
        planted = planted_distribution(sign_link, frame)
        assert distinguish_boolean(planted, 0.5, learner, seed=2).verdict == Verdict.PLANTED

    def test_real_planted_correlation(self, frame):
        report = dual_witness_real(make_target("relu"), 2, 0.05)
        C = 1.0 / report.witness.correlation
        assert C > 1.0
        learner = LearnerConfig(kind="l2", degree=4, n_train=20_000, feature_map=frame)
        planted = planted_distribution(report.witness, frame)
        result = distinguish_real(planted, C, learner, seed=3)
        assert result.verdict == Verdict.PLANTED
        assert result.truth >= 1.0 / (6.0 * C)
        assert result.threshold == pytest.approx(1.0 / (6.0 * C) - 1.0 / (24.0 * C))
        null = distinguish_real(NullDistribution(6), C, learner, seed=3)
        assert null.verdict == Verdict.NULL

    def test_real_planted_correlation_empirical(self, frame):
        report = dual_witness_real(make_target("relu"), 2, 0.05)
        C = 1.0 / report.witness.correlation
        learner = LearnerConfig(kind="l2", degree=4, n_train=20_000, feature_map=frame)
        planted = planted_distribution(report.witness, frame)
        oracle = StatOracle()
        result = distinguish_real(planted, C, learner, seed=4, mode=OracleMode.empirical(200_000, 5),
                                  adversary=Adversary.NONE, oracle=oracle)
        # |h·y| ≤ 1，标准误不超过 1/√N
        se = 1.0 / np.sqrt(200_000)
        assert result.answer >= 1.0 / (6.0 * C) - 3.0 * se
        assert result.verdict == Verdict.PLANTED

    def test_parameter_validation(self, frame):
        with pytest.raises(ParameterError):
            LearnerConfig(kind="l3")
        learner = LearnerConfig(kind="l2", degree=1, n_train=100, feature_map=frame)
        with pytest.raises(ParameterError):
            distinguish_boolean(NullDistribution(6), 1.5, learner, seed=0)
        with pytest.raises(ParameterError):
            distinguish_real(NullDistribution(6), 1.0, learner, seed=0)
