"""Classifiers, evaluation, cross-validation, importance and feature elimination."""

from .compound import (
    CompoundModel,
    SideConfig,
    compound_pairs,
    predict_compound,
    train_compound,
)
from .importance import auc, forest_importance, rank_features, roc_auc_importance
from .metrics import (
    EvalReport,
    FoldResult,
    confusion_matrix,
    evaluate,
    evaluate_predictions,
    report_from_confusion,
)
from .models import (
    BoostConfig,
    DegenerateModelError,
    ForestConfig,
    InvalidInputError,
    TrainedModel,
    ZeroRConfig,
    config_from_document,
    fit,
    train_forest,
    train_logitboost,
    train_zeror,
)
from .persist import ModelFormatError, load_model, save_model
from .rfe import RfePlan, RfeResult, rfe
from .validation import CVPlan, StratificationWarning, cross_validate, fold_assignments

__all__ = [
    "BoostConfig", "CVPlan", "CompoundModel", "DegenerateModelError", "EvalReport", "FoldResult",
    "ForestConfig", "InvalidInputError", "ModelFormatError", "RfePlan", "RfeResult", "SideConfig",
    "StratificationWarning", "TrainedModel", "ZeroRConfig", "auc", "compound_pairs", "config_from_document",
    "confusion_matrix", "cross_validate", "evaluate", "evaluate_predictions", "fit", "fold_assignments",
    "forest_importance", "load_model", "predict_compound", "rank_features", "report_from_confusion", "rfe",
    "roc_auc_importance", "save_model", "train_compound", "train_forest", "train_logitboost", "train_zeror",
]
