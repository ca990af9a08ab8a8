"""Repeated (stratified) k-fold cross-validation."""

from __future__ import annotations

import dataclasses
import warnings
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..dataset import LABELS, Dataset
from ..seeding import derive_seed, rng
from .metrics import EvalReport, FoldResult, confusion_matrix, report_from_confusion
from .models import LearnerConfig, fit


class StratificationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CVPlan:
    k: int = 10
    repeats: int = 5
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


def fold_assignments(labels: Sequence[str], plan: CVPlan) -> list[np.ndarray]:
    """Fold id of every row, one array per repeat.

    Stratified plans shuffle each class separately, concatenate the classes in
    label order and deal positions round-robin into folds, so fold sizes and
    per-fold class counts differ by at most one. If some present class has
    fewer rows than ``k`` the plan degrades to plain shuffling with a warning.
    """
    labels = np.asarray(labels, dtype=object)
    n = len(labels)
    if n < plan.k:
        raise ValueError(f"need at least k={plan.k} rows, got {n}")
    stratified = plan.stratified
    if stratified:
        small = [lab for lab in LABELS if 0 < np.sum(labels == lab) < plan.k]
        if small:
            warnings.warn(
                f"classes {small} have fewer than k={plan.k} rows; using non-stratified folds",
                StratificationWarning,
                stacklevel=2,
            )
            stratified = False
    out = []
    for r in range(plan.repeats):
        gen = rng(plan.seed, "cv", r)
        if stratified:
            order = np.concatenate([gen.permutation(np.flatnonzero(labels == lab)) for lab in LABELS])
        else:
            order = gen.permutation(n)
        folds = np.empty(n, dtype=np.int64)
        folds[order] = np.arange(n) % plan.k
        out.append(folds)
    return out


def iter_folds(labels: Sequence[str], plan: CVPlan) -> Iterator[tuple[int, int, np.ndarray, np.ndarray]]:
    """Yield ``(repeat, fold, train_index, test_index)``."""
    for r, folds in enumerate(fold_assignments(labels, plan)):
        for f in range(plan.k):
            yield r, f, np.flatnonzero(folds != f), np.flatnonzero(folds == f)


def with_seed(config: LearnerConfig, seed: int) -> LearnerConfig:
    if any(fl.name == "seed" for fl in dataclasses.fields(config)):
        return dataclasses.replace(config, seed=seed)
    return config


def pool_folds(folds: list[tuple[FoldResult, np.ndarray]]) -> EvalReport:
    total = sum(conf for _, conf in folds)
    report = report_from_confusion(total)
    report.folds = [fr for fr, _ in folds]
    return report


def cross_validate(
    dataset: Dataset,
    config: LearnerConfig,
    plan: CVPlan = CVPlan(),
    features: Sequence[str] | None = None,
    jobs: int = 1,
    trainer: Callable | None = None,
) -> EvalReport:
    """Out-of-fold evaluation of ``config`` on ``dataset``.

    Every row is predicted once per repeat. The report's confusion matrix
    pools all repeats (so its accuracy is the mean of per-repeat
    accuracies); per-fold results are kept in ``report.folds``. Each fold
    trains with a seed derived from ``(plan.seed, repeat, fold)``.
    ``trainer(config, train, features)`` overrides :func:`fit`.
    """
    trainer = trainer or fit
    labels = dataset.labels
    tasks = list(iter_folds(labels, plan))

    def run(task):
        r, f, tr, te = task
        cfg = with_seed(config, derive_seed(plan.seed, "cv-fit", r, f))
        model = trainer(cfg, dataset.take(tr), features)
        test = dataset.take(te)
        conf = confusion_matrix(test.labels, model.predict(test))
        rep = report_from_confusion(conf)
        return FoldResult(r, f, len(te), rep.accuracy_total, rep.kappa), conf

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]
    return pool_folds(results)
