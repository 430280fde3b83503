"""LEEP: the log expected empirical prediction score.

Pipeline: empirical joint over (target class, source label) from the soft
predictions, conditional by column normalization, then the mean log of the
per-example expected-empirical-predictor likelihoods.  A feature variant
turns raw feature rows into distributions with a stable softmax first
(no temperature, no feature normalization) and scores those.

Every reduction sorts its addends before accumulating, so scores are
bit-identical under permutation of examples, of source-label columns, and
of target class indices.
"""

import numpy as np

from . import _kernels
from .core import (
    ConditionalDistribution,
    FeatureMatrix,
    JointDistribution,
    PredictionMatrix,
    Score,
    TargetLabels,
    require_same_n,
    validate_predictions,
)
from .errors import DegenerateDimension, DimensionMismatch, NumericalFailure

# rounding slack for "inner sum <= 1"; a genuine violation means broken math
INNER_SUM_SLACK = 1e-9


def empirical_joint(pred: PredictionMatrix, labels: TargetLabels) -> JointDistribution:
    """Average the prediction rows of each target class: cell (y, z) is
    (1/n) * sum of pred[i, z] over examples i with label y."""
    require_same_n(pred, labels)
    sums = _kernels.class_sorted_sums(pred.values, labels.values, labels.c)
    joint = sums / pred.n
    joint.setflags(write=False)
    return JointDistribution(joint)


def conditional_from_joint(joint: JointDistribution) -> ConditionalDistribution:
    """Column-normalize the joint; columns with zero marginal are masked out."""
    cells = joint.values
    marginal = np.sort(cells, axis=0).sum(axis=0, dtype=np.longdouble).astype(np.float64)
    mask = marginal > 0.0
    cond = np.zeros_like(cells)
    cond[:, mask] = cells[:, mask] / marginal[mask]
    cond.setflags(write=False)
    mask.setflags(write=False)
    return ConditionalDistribution(cond, mask)


def eep_predict(theta_row, cond: ConditionalDistribution) -> np.ndarray:
    """Class distribution the expected empirical predictor assigns to one
    example: out[y] = sum_z cond[y, z] * theta_row[z].

    Mass on unsupported source labels is dropped (those columns are zero),
    so the output sums to 1 only when the row's support is fully covered.
    """
    theta = np.asarray(theta_row, dtype=np.float64)
    if theta.shape != (cond.m,):
        raise DimensionMismatch(f"theta row has length {theta.shape}, conditional has {cond.m} columns")
    prod = cond.values * theta
    prod.sort(axis=1)
    return prod.sum(axis=1, dtype=np.longdouble).astype(np.float64)


def _checked_inner_sums(pred: PredictionMatrix, labels: TargetLabels, cond: ConditionalDistribution):
    s = _kernels.inner_sums(pred.values, cond.values, labels.values)
    if np.any(s <= 0.0):
        raise NumericalFailure("an EEP likelihood came out <= 0; cannot take its log")
    if np.any(s > 1.0 + INNER_SUM_SLACK):
        raise NumericalFailure(f"an EEP likelihood exceeds 1 by more than {INNER_SUM_SLACK}")
    return np.minimum(s, 1.0)


def leep_score(pred: PredictionMatrix, labels: TargetLabels) -> Score:
    """Mean log-likelihood of the expected empirical predictor; in (-inf, 0]."""
    require_same_n(pred, labels)
    cond = conditional_from_joint(empirical_joint(pred, labels))
    s = _checked_inner_sums(pred, labels, cond)
    value = _kernels.sorted_mean(np.log(s))
    return Score(value=value, measure="leep", n=pred.n, m=pred.m, c=labels.c)


def softmax_rows(features: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for stability."""
    shifted = features - features.max(axis=1, keepdims=True)
    out = np.exp(shifted)
    out /= out.sum(axis=1, keepdims=True)
    return out


def feature_softmax_leep(features: FeatureMatrix, labels: TargetLabels) -> Score:
    """LEEP over softmaxed feature rows instead of classifier outputs."""
    require_same_n(features, labels)
    if features.d < 2:
        raise DegenerateDimension("feature softmax needs at least 2 dimensions")
    pred = validate_predictions(softmax_rows(features.values))
    base = leep_score(pred, labels)
    return Score(value=base.value, measure="feature_leep", n=base.n, m=base.m, c=base.c)
