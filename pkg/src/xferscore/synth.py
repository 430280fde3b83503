"""Synthetic source-model/target-task generator with planted structure.

Each task plants a surjection g(z) = z mod c from source labels onto
target classes.  A prediction row is a Dirichlet-perturbed one-hot
(concentration 10 on the planted label, 0.1 elsewhere) on a label drawn
from g^{-1}(y_i) with probability `alignment`, otherwise on a uniformly
random label, so alignment dials how informative the source model is
about the target task.  Features are one-hot class means in R^c plus
Gaussian noise.  Everything is deterministic in the seed; sweeps derive
per-task seeds splitmix-style so tasks are independent and order-free.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .analysis import ExperimentRecord
from .baselines import h_score, nce_score, dummy_labels
from .core import (
    FeatureMatrix,
    PredictionMatrix,
    TargetLabels,
    feature_matrix,
    validate_labels,
    validate_predictions,
)
from .errors import InvalidSpec
from .leep import leep_score

DIRICHLET_PLANTED = 10.0
DIRICHLET_OTHER = 0.1
HOLDOUT_FRACTION = 0.2

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SynthSpec:
    n: int
    m: int
    c: int
    alignment: float
    noise: float
    seed: int
    perturb: bool = True

    def __post_init__(self):
        if self.c < 2 or self.m < self.c:
            raise InvalidSpec("need m >= c >= 2 for the planted surjection")
        if self.n < self.c:
            raise InvalidSpec("need n >= c so every class can appear")
        if not (0.0 <= self.alignment <= 1.0):
            raise InvalidSpec("alignment must be in [0, 1]")
        if self.noise < 0:
            raise InvalidSpec("noise must be >= 0")
        if not (0 <= self.seed < 2 ** 64):
            raise InvalidSpec("seed must fit in 64 unsigned bits")


def derive_seed(base: int, index: int) -> int:
    """Splitmix64 finalizer over base + golden-ratio strides; decorrelates
    per-task streams from a single base seed."""
    z = (base + 0x9E3779B97F4A7C15 * (index + 1)) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def generate_task(spec: SynthSpec):
    """Returns (PredictionMatrix, FeatureMatrix, TargetLabels) for one task."""
    rng = np.random.default_rng(spec.seed)
    n, m, c = spec.n, spec.m, spec.c

    labels = rng.integers(0, c, size=n)
    labels[:c] = np.arange(c)  # force every class present, then reshuffle
    labels = labels[rng.permutation(n)]

    aligned = rng.random(n) < spec.alignment
    fiber_sizes = np.array([len(range(y, m, c)) for y in range(c)])  # |g^{-1}(y)|
    fiber_pick = rng.integers(0, fiber_sizes[labels])
    random_pick = rng.integers(0, m, size=n)
    planted = np.where(aligned, labels + c * fiber_pick, random_pick)

    if spec.perturb:
        alpha = np.full((n, m), DIRICHLET_OTHER)
        alpha[np.arange(n), planted] = DIRICHLET_PLANTED
        gammas = rng.standard_gamma(alpha)  # row-normalized Gamma == Dirichlet
        rows = gammas / gammas.sum(axis=1, keepdims=True)
    else:
        rows = np.zeros((n, m))
        rows[np.arange(n), planted] = 1.0

    means = np.eye(c)
    feats = means[labels]
    if spec.noise > 0:
        feats = feats + spec.noise * rng.standard_normal((n, c))

    return (
        validate_predictions(rows),
        feature_matrix(feats),
        validate_labels(labels, declared_c=c),
    )


def eep_holdout_accuracy(pred: PredictionMatrix, labels: TargetLabels, seed: int) -> float:
    """Fit the empirical conditional on 80% of the task (seeded shuffle) and
    report argmax-EEP accuracy on the held-out 20%.  Stands in for a
    transfer-learning metric: cheap, deterministic, monotone in alignment."""
    rng = np.random.default_rng(derive_seed(seed, 7919))
    n = pred.n
    perm = rng.permutation(n)
    n_train = n - max(1, int(round(n * HOLDOUT_FRACTION)))
    train, test = perm[:n_train], perm[n_train:]
    # fit on the raw split: a class can be absent from the train half, which
    # just leaves that conditional row empty, so bypass TargetLabels here
    sums = _kernels.class_sorted_sums(pred.values[train], labels.values[train], labels.c)
    total = sums.sum()
    if total <= 0:
        return 0.0
    joint_cells = sums / len(train)
    marginal = joint_cells.sum(axis=0)
    cond = np.zeros_like(joint_cells)
    supported = marginal > 0
    cond[:, supported] = joint_cells[:, supported] / marginal[supported]
    class_scores = pred.values[test] @ cond.T
    predicted = np.argmax(class_scores, axis=1)
    return float(np.mean(predicted == labels.values[test]))


def score_task(pred, feats, labels, task_id: str, seed: int) -> ExperimentRecord:
    return ExperimentRecord(
        task_id=task_id,
        scores={
            "leep": leep_score(pred, labels).value,
            "nce": nce_score(labels, dummy_labels(pred)).value,
            "hscore": h_score(feats, labels).value,
        },
        transfer_metric=eep_holdout_accuracy(pred, labels, seed),
        metric_kind="accuracy",
    )


def sweep(base: SynthSpec, alignments, tasks_per_point: int):
    """Generate and score tasks_per_point tasks at every alignment level."""
    if len(alignments) == 0:
        raise InvalidSpec("alignment list must be nonempty")
    if tasks_per_point < 1:
        raise InvalidSpec("tasks_per_point must be >= 1")
    records = []
    for a_index, alignment in enumerate(alignments):
        for t in range(tasks_per_point):
            task_seed = derive_seed(base.seed, a_index * tasks_per_point + t)
            spec = replace(base, alignment=float(alignment), seed=task_seed)
            pred, feats, labels = generate_task(spec)
            records.append(
                score_task(pred, feats, labels, f"a{alignment:g}-t{t}", task_seed)
            )
    return records
