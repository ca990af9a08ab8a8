"""Recursive feature elimination with resampling."""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..dataset import Dataset
from ..seeding import derive_seed
from .importance import forest_importance, rank_features
from .metrics import EvalReport, FoldResult, confusion_matrix, report_from_confusion
from .models import ForestConfig, LearnerConfig, TrainedModel, fit, train_forest
from .validation import CVPlan, iter_folds, pool_folds, with_seed


@dataclass(frozen=True)
class RfePlan:
    sizes: tuple[int, ...]
    cv: CVPlan = CVPlan()
    learner: LearnerConfig = ForestConfig()
    ranker: ForestConfig | None = None  # defaults to the learner if it is a forest

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(s < 1 for s in sizes) or list(sizes) != sorted(set(sizes)):
            raise ValueError("sizes must be ascending, distinct, positive integers")
        object.__setattr__(self, "sizes", sizes)

    @property
    def ranking_config(self) -> ForestConfig:
        if self.ranker is not None:
            return self.ranker
        return self.learner if isinstance(self.learner, ForestConfig) else ForestConfig()


@dataclass
class RfeResult:
    size: int
    features: list[str]
    model: TrainedModel
    report: EvalReport
    profile: list[dict] = field(default_factory=list)
    selection_counts: dict[str, int] = field(default_factory=dict)

    def to_document(self) -> dict:
        return {
            "size": self.size,
            "features": self.features,
            "report": self.report.to_document(),
            "profile": self.profile,
            "selection_counts": self.selection_counts,
        }


def _ranking(train: Dataset, features: Sequence[str], config: ForestConfig, seed: int) -> list[str]:
    model = train_forest(train, dataclasses.replace(config, seed=seed), features)
    return rank_features(forest_importance(model))


def rfe(dataset: Dataset, plan: RfePlan, features: Sequence[str] | None = None) -> RfeResult:
    """Score the top-``S`` features for every subset size ``S`` out of fold.

    In each resample a forest on all features ranks them by Gini importance
    and the learner is refit on each top-``S`` prefix and scored on the
    held-out rows. Subsets keep the input column order and each fold fits
    with the same seed as :func:`cross_validate`, so a plan whose only size
    is the full feature count reproduces plain cross-validation.

    The champion is the size with the best mean accuracy (smallest size on
    ties); it is refit on all rows with features ranked on all rows. The
    full feature count is always part of the profile.
    """
    features = list(dataset.feature_columns if features is None else features)
    p = len(features)
    if plan.sizes[-1] > p:
        raise ValueError(f"subset size {plan.sizes[-1]} exceeds the {p} available features")
    sizes = list(plan.sizes) + ([p] if plan.sizes[-1] != p else [])
    per_size: dict[int, list] = {s: [] for s in sizes}
    chosen: dict[int, dict[str, int]] = {s: {} for s in sizes}
    for r, f, tr, te in iter_folds(dataset.labels, plan.cv):
        train, test = dataset.take(tr), dataset.take(te)
        ranked = _ranking(train, features, plan.ranking_config, derive_seed(plan.cv.seed, "rfe-rank", r, f))
        for s in sizes:
            top = set(ranked[:s])
            subset = [feat for feat in features if feat in top]
            for feat in subset:
                chosen[s][feat] = chosen[s].get(feat, 0) + 1
            cfg = with_seed(plan.learner, derive_seed(plan.cv.seed, "cv-fit", r, f))
            model = fit(cfg, train, subset)
            conf = confusion_matrix(test.labels, model.predict(test))
            rep = report_from_confusion(conf)
            per_size[s].append((FoldResult(r, f, len(te), rep.accuracy_total, rep.kappa), conf))

    reports = {s: pool_folds(per_size[s]) for s in sizes}
    profile = [
        {
            "size": s,
            "accuracy": reports[s].mean_accuracy,
            "accuracy_sd": reports[s].sd_accuracy,
            "kappa": reports[s].mean_kappa,
            "kappa_sd": reports[s].sd_kappa,
        }
        for s in sizes
    ]
    best = max(sizes, key=lambda s: (np.round(reports[s].mean_accuracy, 12), -s))
    ranked = _ranking(dataset, features, plan.ranking_config, derive_seed(plan.cv.seed, "rfe-rank", "final"))
    top = set(ranked[:best])
    final_features = [feat for feat in features if feat in top]
    model = fit(with_seed(plan.learner, derive_seed(plan.cv.seed, "rfe-fit", "final")), dataset, final_features)
    counts = {feat: chosen[best].get(feat, 0) for feat in features}
    return RfeResult(best, final_features, model, reports[best], profile, counts)
