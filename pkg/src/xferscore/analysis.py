"""Evaluation methodology: Pearson correlation with Student-t p-values,
equal-width score binning, F1 for imbalanced binary targets, best-fit
lines, and source-model ranking."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConstantInput,
    Empty,
    InsufficientData,
    LengthMismatch,
    MissingPositiveClass,
    NotBinary,
    TooFewPoints,
    ValidationError,
)

METRIC_KINDS = ("accuracy", "f1")


@dataclass(frozen=True)
class ExperimentRecord:
    """One scored task: a map of measure -> score plus an optional observed
    transfer metric (test accuracy or F1) to correlate against."""

    task_id: str
    scores: dict = field(default_factory=dict)
    transfer_metric: float | None = None
    metric_kind: str | None = None

    def __post_init__(self):
        if self.transfer_metric is not None and not (0.0 <= self.transfer_metric <= 1.0):
            raise ValidationError(f"transfer metric {self.transfer_metric!r} outside [0, 1]")
        if self.metric_kind is not None and self.metric_kind not in METRIC_KINDS:
            raise ValidationError(f"metric_kind must be one of {METRIC_KINDS}")


@dataclass(frozen=True)
class CorrelationReport:
    measure: str
    r: float
    p_value: float
    n: int
    fit_slope: float
    fit_intercept: float


@dataclass(frozen=True)
class RankingReport:
    """Models ordered by descending score (larger LEEP, i.e. smaller absolute
    value, means better predicted transfer and ranks first)."""

    measure: str
    entries: list  # [(model_id, score)], descending
    has_ties: bool
    tie_groups: list = field(default_factory=list)


def pearson(xs, ys) -> float:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise LengthMismatch(f"lengths differ: {xs.shape} vs {ys.shape}")
    if xs.ndim != 1 or xs.size < 3:
        raise TooFewPoints("pearson needs at least 3 points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(dx @ dx)
    sy = float(dy @ dy)
    if sx == 0.0 or sy == 0.0:
        raise ConstantInput("pearson is undefined for a constant input")
    r = float(dx @ dy) / math.sqrt(sx * sy)
    if abs(r) > 1.0 + 1e-12:
        raise ValidationError(f"|r| = {abs(r)!r} exceeds 1 beyond rounding")
    return min(1.0, max(-1.0, r))


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) by the continued fraction of the incomplete beta integral
    (modified Lentz evaluation, relative tolerance 1e-12)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def _beta_cf(a: float, b: float, x: float, tol: float = 1e-12, max_iter: int = 500) -> float:
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        num = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + num * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + num / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        num = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + num * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + num / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ValidationError("incomplete beta continued fraction did not converge")


def p_value_two_sided(r: float, n: int) -> float:
    """Two-sided Student-t p-value of a sample Pearson r at n points."""
    if n < 3:
        raise TooFewPoints("p-value needs at least 3 points")
    if abs(r) > 1.0 + 1e-12:
        raise ValidationError(f"|r| = {abs(r)!r} exceeds 1")
    r = min(1.0, max(-1.0, r))
    if abs(r) == 1.0:
        return 0.0
    dof = n - 2
    t_sq = r * r * dof / (1.0 - r * r)
    return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t_sq))


def bin_levels(scores, k: int = 5) -> np.ndarray:
    """Equal-width levels over [min, max]; the last bin is right-closed;
    a degenerate range puts everything in level 0."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise Empty("bin_levels needs a nonempty 1-D score array")
    if k < 1:
        raise ValidationError("k must be >= 1")
    lo = float(scores.min())
    hi = float(scores.max())
    if hi == lo:
        return np.zeros(scores.size, dtype=np.int64)
    width = (hi - lo) / k
    levels = np.floor((scores - lo) / width).astype(np.int64)
    return np.clip(levels, 0, k - 1)


def minority_class(actual) -> int:
    """Least frequent of the two binary classes; lower index wins a tie."""
    actual = np.asarray(actual, dtype=np.int64)
    counts = np.bincount(actual, minlength=2)
    return int(np.argmin(counts))


def _check_binary(arr, name):
    arr = np.asarray(arr, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise Empty(f"{name} must be a nonempty 1-D label array")
    if np.any((arr < 0) | (arr > 1)):
        raise NotBinary(f"{name} must contain only 0/1 labels")
    return arr


def f1_binary(predicted, actual, positive_class: int) -> float:
    """2 * precision * recall / (precision + recall); 0 when both are 0."""
    predicted = _check_binary(predicted, "predicted")
    actual = _check_binary(actual, "actual")
    if predicted.shape != actual.shape:
        raise LengthMismatch("predicted and actual lengths differ")
    if positive_class not in (0, 1):
        raise NotBinary("positive_class must be 0 or 1")
    if not np.any(actual == positive_class):
        raise MissingPositiveClass(f"class {positive_class} absent from actual labels")
    tp = int(np.sum((predicted == positive_class) & (actual == positive_class)))
    fp = int(np.sum((predicted == positive_class) & (actual != positive_class)))
    fn = int(np.sum((predicted != positive_class) & (actual == positive_class)))
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def f1_macro(predicted, actual) -> float:
    """Unweighted mean of both per-class F1 values."""
    return 0.5 * (f1_binary(predicted, actual, 0) + f1_binary(predicted, actual, 1))


def correlate(records, measure: str, metric_kind: str | None = None) -> CorrelationReport:
    """Pearson r, p-value, and least-squares fit of metric against score
    over the records that carry both."""
    xs, ys = [], []
    for rec in records:
        if measure not in rec.scores or rec.transfer_metric is None:
            continue
        if metric_kind is not None and rec.metric_kind != metric_kind:
            continue
        xs.append(rec.scores[measure])
        ys.append(rec.transfer_metric)
    if len(xs) < 3:
        raise InsufficientData(
            f"need >= 3 records with a {measure} score and a transfer metric, have {len(xs)}"
        )
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    r = pearson(xs, ys)
    p = p_value_two_sided(r, xs.size)
    dx = xs - xs.mean()
    slope = float(dx @ (ys - ys.mean())) / float(dx @ dx)
    intercept = float(ys.mean() - slope * xs.mean())
    return CorrelationReport(measure=measure, r=r, p_value=p, n=int(xs.size),
                             fit_slope=slope, fit_intercept=intercept)


def rank_models(records, measure: str) -> RankingReport:
    """Order models by descending score; input order is kept on exact ties."""
    entries = [(rec.task_id, rec.scores[measure]) for rec in records if measure in rec.scores]
    if len(entries) < 2:
        raise InsufficientData(f"ranking needs >= 2 models with a {measure} score")
    ranked = sorted(entries, key=lambda e: -e[1])  # sorted() is stable
    tie_groups = []
    i = 0
    while i < len(ranked):
        j = i + 1
        while j < len(ranked) and ranked[j][1] == ranked[i][1]:
            j += 1
        if j - i > 1:
            tie_groups.append([model for model, _ in ranked[i:j]])
        i = j
    return RankingReport(measure=measure, entries=ranked,
                         has_ties=bool(tie_groups), tie_groups=tie_groups)


def average_curves_by_level(epochs, curves, levels):
    """Average user-supplied accuracy-difference curves within each level.

    `curves` is (tasks, len(epochs)); returns {level: mean curve} with no
    training performed here.
    """
    epochs = np.asarray(epochs)
    curves = np.asarray(curves, dtype=np.float64)
    levels = np.asarray(levels, dtype=np.int64)
    if curves.shape != (levels.size, epochs.size):
        raise LengthMismatch("curves must be (tasks, epochs) aligned with levels")
    return {
        int(lv): curves[levels == lv].mean(axis=0)
        for lv in np.unique(levels)
    }
