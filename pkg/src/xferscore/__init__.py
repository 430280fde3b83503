"""Transferability scoring from exported model outputs.

Given a source model's predictions (and optionally its features) on a
target data set, estimate how well the model will transfer before any
fine-tuning happens, and provide the analysis tools (correlation,
ranking, binning) used to evaluate such estimates against observed
transfer performance.
"""

from .analysis import (
    CorrelationReport,
    ExperimentRecord,
    RankingReport,
    average_curves_by_level,
    bin_levels,
    correlate,
    f1_binary,
    f1_macro,
    minority_class,
    p_value_two_sided,
    pearson,
    rank_models,
    regularized_incomplete_beta,
)
from .baselines import DummyLabels, dummy_labels, h_score, leep_lower_bound, nce_score
from .core import (
    ConditionalDistribution,
    FeatureMatrix,
    JointDistribution,
    PredictionMatrix,
    Score,
    TargetLabels,
    feature_matrix,
    validate_labels,
    validate_predictions,
)
from .errors import (
    FormatError,
    NumericalFailure,
    ValidationError,
    XferScoreError,
)
from .head import LinearHead, TrainConfig, TwoStageResult, avg_log_likelihood, train_linear_head, two_stage_optimal
from .leep import (
    conditional_from_joint,
    eep_predict,
    empirical_joint,
    feature_softmax_leep,
    leep_score,
    softmax_rows,
)
from .synth import SynthSpec, derive_seed, eep_holdout_accuracy, generate_task, score_task, sweep

__version__ = "0.1.0"

__all__ = [
    "ConditionalDistribution",
    "CorrelationReport",
    "DummyLabels",
    "ExperimentRecord",
    "FeatureMatrix",
    "FormatError",
    "JointDistribution",
    "LinearHead",
    "NumericalFailure",
    "PredictionMatrix",
    "RankingReport",
    "Score",
    "SynthSpec",
    "TargetLabels",
    "TrainConfig",
    "TwoStageResult",
    "ValidationError",
    "XferScoreError",
    "average_curves_by_level",
    "avg_log_likelihood",
    "bin_levels",
    "conditional_from_joint",
    "correlate",
    "derive_seed",
    "dummy_labels",
    "eep_holdout_accuracy",
    "eep_predict",
    "empirical_joint",
    "f1_binary",
    "f1_macro",
    "feature_matrix",
    "feature_softmax_leep",
    "generate_task",
    "h_score",
    "leep_lower_bound",
    "leep_score",
    "minority_class",
    "p_value_two_sided",
    "pearson",
    "rank_models",
    "regularized_incomplete_beta",
    "score_task",
    "softmax_rows",
    "sweep",
    "train_linear_head",
    "two_stage_optimal",
    "validate_labels",
    "validate_predictions",
]
