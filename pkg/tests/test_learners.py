import numpy as np
import pytest

from errors import ParameterError, ResourceError
from frames import make_frame
from hermite import HermiteExpansion, hermite_eval
from instances import NullDistribution
from learners import (
    Metric,
    PolynomialHypothesis,
    design_matrix,
    evaluate,
    l1_loss,
    l1_regression,
    l2_regression,
    threshold_hypothesis,
)
from quadrature import make_rng


@pytest.fixture
def noisy_sign():
    rng = make_rng(21, 0)
    x = rng.standard_normal((400, 1))
    y = np.where(x[:, 0] >= 0, 1.0, -1.0)
    flip = rng.random(400) < 0.1
    return x, np.where(flip, -y, y)


class TestDesignMatrix:

    def test_columns_follow_graded_order(self):
        z = np.array([[0.5, -1.0], [2.0, 0.3]])
        phi = design_matrix(z, 2)
        assert phi.shape == (2, 6)
        np.testing.assert_allclose(phi[:, 0], 1.0)
        np.testing.assert_allclose(phi[:, 1], z[:, 0])
        np.testing.assert_allclose(phi[:, 2], z[:, 1])
        np.testing.assert_allclose(phi[:, 4], z[:, 0] * z[:, 1])
        np.testing.assert_allclose(phi[:, 5], hermite_eval(2, z[:, 1]))

    def test_basis_limit(self):
        with pytest.raises(ResourceError):
            design_matrix(np.zeros((2, 10)), 6)


class TestRegression:

    def test_l2_recovers_polynomial(self):
        x = make_rng(1, 0).standard_normal((200, 1))
        y = 1.0 + 2.0 * x[:, 0] + hermite_eval(2, x[:, 0])
        h = l2_regression((x, y), 2)
        np.testing.assert_allclose(h.expansion.as_array(), [1.0, 2.0, 1.0], atol=1e-7)
        assert h.degree == 2

    def test_l1_beats_l2_in_l1_loss(self, noisy_sign):
        h1 = l1_regression(noisy_sign, 3)
        h2 = l2_regression(noisy_sign, 3)
        assert l1_loss(h1, noisy_sign) <= l1_loss(h2, noisy_sign) + 1e-9

    def test_l1_backends_agree(self, noisy_sign):
        a = l1_loss(l1_regression(noisy_sign, 2, method="highs"), noisy_sign)
        b = l1_loss(l1_regression(noisy_sign, 2, method="simplex"), noisy_sign)
        assert a == pytest.approx(b, abs=1e-7)

    def test_feature_map(self):
        frame = make_frame(np.eye(4)[:1])
        x = make_rng(2, 0).standard_normal((300, 4))
        y = 3.0 * x[:, 0]
        h = l2_regression((x, y), 1, feature_map=frame)
        assert h.expansion.m == 1
        assert h.expansion.coefficient(1) == pytest.approx(3.0, abs=1e-7)
        np.testing.assert_allclose(h.polynomial(x), y, atol=1e-6)

    def test_too_few_samples(self):
        x = np.zeros((20, 1))
        with pytest.raises(ParameterError):
            l2_regression((x, np.zeros(20)), 3)
        with pytest.raises(ParameterError):
            l2_regression((np.zeros((50, 1)), np.zeros(49)), 1)


class TestThreshold:

    def test_threshold_separates_labels(self):
        x = np.linspace(-2, 2, 41)[:, None]
        y = np.where(x[:, 0] > 0.35, 1.0, -1.0)
        h = PolynomialHypothesis(HermiteExpansion.univariate([0.0, 1.0]))
        thresholded = threshold_hypothesis(h, (x, y))
        assert thresholded.boolean
        assert 0.3 < thresholded.threshold < 0.4
        np.testing.assert_array_equal(thresholded(x), y)

    def test_constant_labels_use_sentinel(self):
        x = np.linspace(-1, 1, 11)[:, None]
        h = PolynomialHypothesis(HermiteExpansion.univariate([0.0, 1.0]))
        thresholded = threshold_hypothesis(h, (x, np.ones(11)))
        np.testing.assert_array_equal(thresholded(x), 1.0)

    def test_requires_pm1_labels(self):
        h = PolynomialHypothesis(HermiteExpansion.univariate([0.0, 1.0]))
        with pytest.raises(ParameterError):
            threshold_hypothesis(h, (np.zeros((3, 1)), np.array([0.0, 1.0, 2.0])))

    def test_boolean_needs_threshold(self):
        with pytest.raises(ParameterError):
            PolynomialHypothesis(HermiteExpansion.univariate([1.0]), boolean=True)


class TestEvaluate:

    def test_misclassification(self):
        x = np.linspace(-1, 1, 10)[:, None]
        y = np.where(x[:, 0] >= 0, 1.0, -1.0)
        h = PolynomialHypothesis(HermiteExpansion.univariate([0.0, 1.0])).with_threshold(0.0)
        record = evaluate(h, (x, y), experiment_id="unit")
        assert record.error == 0.0
        assert record.label_correlation == pytest.approx(1.0)
        assert record.metric == "misclassification"
        assert record.excess is None

    def test_l2_metric(self):
        x = np.zeros((4, 1))
        y = np.array([1.0, -1.0, 1.0, -1.0])
        record = evaluate(lambda x: np.zeros(x.shape[0]), (x, y), Metric.L2, learner_degree=0)
        assert record.error == pytest.approx(1.0)
        assert record.learner_degree == 0

    def test_distribution_input(self):
        h = PolynomialHypothesis(HermiteExpansion(2, 1, {(1, 0): 1.0})).with_threshold(0.0)
        record = evaluate(h, NullDistribution(2), n_samples=5_000, seed=3)
        assert record.n_samples == 5_000
        assert abs(record.error - 0.5) <= 5 * record.std_error
        with pytest.raises(ParameterError):
            evaluate(h, NullDistribution(2))

    def test_real_predictions_rejected(self):
        x = np.zeros((3, 1))
        with pytest.raises(ParameterError):
            evaluate(lambda x: np.full(x.shape[0], 0.3), (x, np.ones(3)))
