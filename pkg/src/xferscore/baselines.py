"""Comparison measures: NCE over hard dummy labels, the H-score of the
feature covariances, and the lower-bound quantity that sandwiches LEEP
from below (NCE plus the mean log dummy-label likelihood)."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import FeatureMatrix, PredictionMatrix, Score, TargetLabels, require_same_n
from .errors import LengthMismatch, NegativeTrace, NumericalFailure, ValidationError
from .leep import conditional_from_joint, empirical_joint

HSCORE_RCOND = 1e-8
NEGATIVE_TRACE_TOL = -1e-9


@dataclass(frozen=True)
class DummyLabels:
    """Hard argmax source labels, lowest index on ties; tie_count counts tied rows."""

    values: np.ndarray
    m: int
    tie_count: int

    @property
    def n(self) -> int:
        return self.values.shape[0]


def dummy_labels(pred: PredictionMatrix) -> DummyLabels:
    vals = pred.values
    z = np.argmax(vals, axis=1)  # argmax returns the first maximum
    row_max = vals[np.arange(pred.n), z]
    ties = int(((vals == row_max[:, None]).sum(axis=1) > 1).sum())
    z = z.astype(np.int64)
    z.setflags(write=False)
    return DummyLabels(z, pred.m, ties)


def nce_score(labels: TargetLabels, dummy: DummyLabels) -> Score:
    """Mean log empirical conditional of the true label given the hard dummy
    label, counted over the observed (y, z) pairs.  Each pair is itself
    observed, so every conditional is >= 1/n and the score is finite."""
    if labels.n != dummy.n:
        raise LengthMismatch(f"example counts differ: {labels.n} vs {dummy.n}")
    counts = np.zeros((labels.c, dummy.m), dtype=np.int64)
    np.add.at(counts, (labels.values, dummy.values), 1)
    col_totals = counts.sum(axis=0)
    pair_conditionals = (
        counts[labels.values, dummy.values] / col_totals[dummy.values]
    )
    value = _kernels.sorted_mean(np.log(pair_conditionals))
    return Score(value=value, measure="nce", n=labels.n, m=dummy.m, c=labels.c)


def leep_lower_bound(pred: PredictionMatrix, labels: TargetLabels) -> float:
    """Mean log of the averaged-prediction conditional at each argmax pair,
    plus the mean log confidence of the argmax itself.

    The main score's inner sum dominates its single z_i term, so LEEP is
    always >= this quantity; `verify` prints both sides.  Note the
    conditional here is the averaged one the score itself uses, NOT the
    pair-counting conditional of nce_score: counted pair frequencies
    maximize the sample log-likelihood, so nce_score + mean log confidence
    can exceed LEEP on small samples (the two coincide as predictions
    approach one-hot).
    """
    require_same_n(pred, labels)
    dummy = dummy_labels(pred)
    cond = conditional_from_joint(empirical_joint(pred, labels))
    pair_cond = cond.values[labels.values, dummy.values]
    argmax_probs = pred.values[np.arange(pred.n), dummy.values]
    # every pair conditional is positive: example i puts theta_i,z_i/n >= 1/(n m)
    # of mass on its own (y_i, z_i) cell
    return (_kernels.sorted_mean(np.log(pair_cond))
            + _kernels.sorted_mean(np.log(argmax_probs)))


def _class_conditional_mean_cov(centered: np.ndarray, labels: TargetLabels):
    """Covariance of class-conditional means, classes weighted by frequency."""
    n, d = centered.shape
    cov = np.zeros((d, d), dtype=np.float64)
    for y in range(labels.c):
        members = centered[labels.values == y]
        if members.shape[0] == 0:
            continue
        g = members.mean(axis=0)
        cov += (members.shape[0] / n) * np.outer(g, g)
    return cov


def h_score(features: FeatureMatrix, labels: TargetLabels) -> Score:
    """trace(pinv(cov_features) @ cov_class_means).

    The pseudo-inverse comes from a symmetric eigendecomposition with
    eigenvalues below 1e-8 * lambda_max dropped; both covariances are
    normalized by 1/n so their ratio is normalization-free.
    """
    require_same_n(features, labels)
    if features.n < 2:
        raise ValidationError("h_score needs more than one example")
    f = features.values
    centered = f - f.mean(axis=0)
    cov_f = centered.T @ centered / features.n
    cov_g = _class_conditional_mean_cov(centered, labels)
    try:
        eigvals, eigvecs = np.linalg.eigh(cov_f)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    cutoff = HSCORE_RCOND * max(float(eigvals.max()), 0.0)
    keep = eigvals > cutoff
    inv_vals = np.zeros_like(eigvals)
    inv_vals[keep] = 1.0 / eigvals[keep]
    pinv = (eigvecs * inv_vals) @ eigvecs.T
    trace = float(np.sum(pinv * cov_g))  # == trace(pinv @ cov_g), both symmetric
    if trace < NEGATIVE_TRACE_TOL:
        raise NegativeTrace(trace)
    return Score(value=max(trace, 0.0), measure="hscore", n=features.n, m=features.d, c=labels.c)
