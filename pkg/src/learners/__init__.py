from .regression import (
    PolynomialHypothesis,
    design_matrix,
    l1_regression,
    l1_loss,
    threshold_hypothesis,
    l2_regression,
)
from .evaluation import Metric, ResultRecord, evaluate

__all__ = [
    'PolynomialHypothesis',
    'design_matrix',
    'l1_regression',
    'l1_loss',
    'threshold_hypothesis',
    'l2_regression',
    'Metric',
    'ResultRecord',
    'evaluate',
]
