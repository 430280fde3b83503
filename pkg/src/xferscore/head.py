"""Linear-head retraining and the two-stage classifier selection.

The head is a softmax linear classifier trained by mini-batch SGD on the
average cross-entropy (zero init, fixed per-epoch shuffles from a seeded
PRNG, optional L2 on the weights, fixed epoch count, no early stopping).
The objective is convex, so zero init costs nothing but determinism buys
reproducible bounds checking.  The two-stage step takes the better of the
trained head and the expected empirical predictor, whose average
log-likelihood is by definition the LEEP score; the selected maximum can
therefore never fall below LEEP.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import FeatureMatrix, PredictionMatrix, TargetLabels, require_same_n
from .errors import DimensionMismatch, NonFiniteLoss, ValidationError
from .leep import leep_score


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 100
    batch_size: int = 10
    seed: int = 0
    l2: float = 0.0

    def __post_init__(self):
        if not (self.learning_rate > 0 and np.isfinite(self.learning_rate)):
            raise ValidationError("learning_rate must be positive and finite")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be >= 1")
        if not (0 <= self.seed < 2 ** 64):
            raise ValidationError("seed must fit in 64 unsigned bits")
        if self.l2 < 0:
            raise ValidationError("l2 must be >= 0")


@dataclass(frozen=True)
class LinearHead:
    weights: np.ndarray  # (c, d)
    bias: np.ndarray     # (c,)

    @property
    def c(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class TwoStageResult:
    best: str          # "trained_head" or "eep"
    l_star: float
    head_loglik: float
    leep: float


def train_linear_head(features: FeatureMatrix, labels: TargetLabels, cfg: TrainConfig) -> LinearHead:
    require_same_n(features, labels)
    rng = np.random.default_rng(cfg.seed)
    orders = np.empty((cfg.epochs, features.n), dtype=np.int64)
    for e in range(cfg.epochs):
        orders[e] = rng.permutation(features.n)
    weights, bias = _kernels.sgd_train(
        features.values, labels.values, labels.c, orders,
        cfg.learning_rate, cfg.batch_size, cfg.l2,
    )
    if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
        raise NonFiniteLoss("training diverged; lower the learning rate")
    weights.setflags(write=False)
    bias.setflags(write=False)
    return LinearHead(weights, bias)


def avg_log_likelihood(head: LinearHead, features: FeatureMatrix, labels: TargetLabels) -> float:
    """Mean log softmax probability of the true class; always <= 0."""
    require_same_n(features, labels)
    if head.d != features.d or head.c < labels.c:
        raise DimensionMismatch(
            f"head is {head.c}x{head.d}, features have d={features.d}, labels c={labels.c}"
        )
    logits = features.values @ head.weights.T + head.bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(features.n), labels.values]
    return _kernels.sorted_mean(picked - log_norm)


def two_stage_optimal(
    pred: PredictionMatrix,
    features: FeatureMatrix,
    labels: TargetLabels,
    cfg: TrainConfig,
) -> TwoStageResult:
    """Train the linear head, then keep whichever of {trained head, EEP}
    has the higher average log-likelihood (ties go to the EEP)."""
    require_same_n(pred, labels)
    head = train_linear_head(features, labels, cfg)
    head_ll = avg_log_likelihood(head, features, labels)
    leep = leep_score(pred, labels).value
    if leep >= head_ll:
        return TwoStageResult("eep", leep, head_ll, leep)
    return TwoStageResult("trained_head", head_ll, head_ll, leep)
