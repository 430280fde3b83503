"""Validated domain types shared by every measure.

All containers are immutable after construction (arrays are marked
read-only), so they can be shared freely across threads.  Validation is
front-loaded here so the math modules can assume exact row-stochastic
predictions, dense 0-based labels with every class present, and finite
features.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDimension,
    Empty,
    EmptyMatrix,
    LengthMismatch,
    MissingClass,
    NegativeEntry,
    NumericalFailure,
    OutOfRange,
    RowSumOutOfTolerance,
    ValidationError,
)

ROW_SUM_LOAD_TOL = 1e-3     # accepted drift of exported float32 softmax rows
ROW_SUM_EXACT_TOL = 1e-12   # guaranteed after renormalization
DIST_SUM_TOL = 1e-9

MEASURES = ("leep", "nce", "hscore", "feature_leep")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PredictionMatrix:
    """n x m row-stochastic matrix: row i is the source-label distribution of example i."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class TargetLabels:
    """Dense 0-based target class indices; every class in [0, c) occurs at least once."""

    values: np.ndarray
    c: int

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FeatureMatrix:
    """n x d real feature matrix (penultimate-layer activations or similar)."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def feature_matrix(raw) -> FeatureMatrix:
    """Build a FeatureMatrix from raw values, rejecting non-finite entries."""
    arr = np.array(raw, dtype=np.float64, order="C")
    if arr.ndim != 2 or arr.size == 0:
        raise EmptyMatrix("feature matrix must be 2-D and nonempty")
    if not np.isfinite(arr).all():
        raise ValidationError("feature matrix contains non-finite entries")
    return FeatureMatrix(_frozen(arr))


@dataclass(frozen=True)
class JointDistribution:
    """c x m empirical joint over (target class, source label); sums to 1."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if np.any(v < 0):
            raise ValidationError("joint distribution has a negative cell")
        total = float(v.sum(dtype=np.longdouble))
        if abs(total - 1.0) > DIST_SUM_TOL:
            raise ValidationError(f"joint distribution sums to {total!r}, not 1")

    @property
    def c(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ConditionalDistribution:
    """c x m columns P(y | z); unsupported columns (marginal 0) are zero and masked."""

    values: np.ndarray
    support_mask: np.ndarray

    def __post_init__(self):
        v, mask = self.values, self.support_mask
        if mask.shape != (v.shape[1],):
            raise ValidationError("support mask length must equal column count")
        col_sums = v.sum(axis=0, dtype=np.longdouble).astype(np.float64)
        if np.any(np.abs(col_sums[mask] - 1.0) > DIST_SUM_TOL):
            raise ValidationError("a supported conditional column does not sum to 1")
        if np.any(v[:, ~mask] != 0.0):
            raise ValidationError("an unsupported conditional column has nonzero mass")

    @property
    def c(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Score:
    """A transferability score plus the instance sizes it was computed from.

    For leep/nce/feature_leep the value is a mean log-likelihood, so it must
    be finite and <= 0; hscore is a trace of PSD factors, finite and >= 0.
    `m` records the width of the scored matrix (source labels, or feature
    dimension for hscore/feature_leep).
    """

    value: float
    measure: str
    n: int
    m: int
    c: int

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValidationError(f"unknown measure {self.measure!r}")
        if not np.isfinite(self.value):
            raise NumericalFailure(f"{self.measure} score is not finite: {self.value!r}")
        if self.measure == "hscore":
            if self.value < 0:
                raise NumericalFailure(f"hscore must be >= 0, got {self.value!r}")
        elif self.value > 0:
            raise NumericalFailure(f"{self.measure} must be <= 0, got {self.value!r}")


def validate_predictions(raw) -> PredictionMatrix:
    """Validate and renormalize raw prediction rows into a PredictionMatrix.

    Rows whose sum is within 1e-3 of 1 are renormalized so that afterwards
    |row sum - 1| <= 1e-12; rows already within 1e-12 are left untouched
    bit-for-bit, which makes validation idempotent.
    """
    arr = np.array(raw, dtype=np.float64, order="C")
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyMatrix("prediction matrix must be 2-D and nonempty")
    if arr.shape[1] < 2:
        raise DegenerateDimension("prediction matrix needs at least 2 source labels")
    if not np.isfinite(arr).all():
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise ValidationError(f"non-finite prediction entry at ({bad[0]}, {bad[1]})")
    negatives = np.argwhere(arr < 0)
    if negatives.size:
        i, j = negatives[0]
        raise NegativeEntry(int(i), int(j), float(arr[i, j]))
    sums = arr.sum(axis=1, dtype=np.longdouble).astype(np.float64)
    off = np.abs(sums - 1.0)
    worst = int(np.argmax(off))
    if off[worst] > ROW_SUM_LOAD_TOL:
        raise RowSumOutOfTolerance(worst, float(sums[worst]))
    # renormalize only rows that need it; two passes suffice for any m
    for _ in range(2):
        stale = off > ROW_SUM_EXACT_TOL
        if not stale.any():
            break
        arr[stale] /= sums[stale, None]
        sums = arr.sum(axis=1, dtype=np.longdouble).astype(np.float64)
        off = np.abs(sums - 1.0)
    if np.any(off > ROW_SUM_EXACT_TOL):
        raise NumericalFailure("row renormalization failed to converge")
    return PredictionMatrix(_frozen(arr))


def validate_labels(raw, declared_c: int | None = None) -> TargetLabels:
    """Validate raw integer labels; c defaults to 1 + max(raw)."""
    arr = np.array(raw, dtype=np.int64)
    if arr.ndim != 1 or arr.shape[0] == 0:
        raise Empty("labels must be a nonempty 1-D integer sequence")
    if declared_c is None:
        c = int(arr.max()) + 1
    else:
        c = int(declared_c)
    if c < 2:
        raise DegenerateDimension("need at least 2 target classes")
    bad = np.nonzero((arr < 0) | (arr >= c))[0]
    if bad.size:
        raise OutOfRange(int(bad[0]), int(arr[bad[0]]))
    present = np.bincount(arr, minlength=c) > 0
    if not present.all():
        raise MissingClass(int(np.argmin(present)))
    return TargetLabels(_frozen(arr), c)


def require_same_n(a, b):
    if a.n != b.n:
        raise LengthMismatch(f"example counts differ: {a.n} vs {b.n}")
