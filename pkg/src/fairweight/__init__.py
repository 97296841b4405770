"""Label-bias correction for binary classifiers via example reweighting."""

from .baselines import CalibratedModel, calibrate, train_unconstrained
from .biasgen import BiasSpec, SyntheticTask, bias_score, debias_check, generate
from .classifier import (
    ModelParams,
    TrainConfig,
    predict_label,
    predict_proba,
    train_weighted,
    weighted_gradient,
)
from .constraints import (
    BaseRates,
    ConstraintSet,
    FairnessNotion,
    base_rates,
    constraint_set,
    constraint_value,
    max_abs_violation,
    violation,
)
from .data import (
    GroupSpec,
    LabeledDataset,
    SplitConfig,
    load_csv,
    mask_group_features,
    train_test_split,
)
from .reweighting import (
    FitResult,
    Multipliers,
    ReweighConfig,
    WeightAssignment,
    example_weight,
    example_weight_eqodds,
    fit,
    sampling_mask,
    update_multipliers,
)

__version__ = "0.1.0"

__all__ = [
    "BaseRates",
    "BiasSpec",
    "CalibratedModel",
    "ConstraintSet",
    "FairnessNotion",
    "FitResult",
    "GroupSpec",
    "LabeledDataset",
    "ModelParams",
    "Multipliers",
    "ReweighConfig",
    "SplitConfig",
    "SyntheticTask",
    "TrainConfig",
    "WeightAssignment",
    "base_rates",
    "bias_score",
    "calibrate",
    "constraint_set",
    "constraint_value",
    "debias_check",
    "example_weight",
    "example_weight_eqodds",
    "fit",
    "generate",
    "load_csv",
    "mask_group_features",
    "max_abs_violation",
    "predict_label",
    "predict_proba",
    "sampling_mask",
    "train_test_split",
    "train_unconstrained",
    "train_weighted",
    "update_multipliers",
    "violation",
    "weighted_gradient",
]
