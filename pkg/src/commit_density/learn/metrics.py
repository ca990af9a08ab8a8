"""Confusion matrices, accuracy and Cohen's Kappa."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..dataset import LABELS


@dataclass
class FoldResult:
    repeat: int
    fold: int
    n: int
    accuracy: float
    kappa: float | None


@dataclass
class EvalReport:
    """Agreement between true (rows) and predicted (columns) labels.

    ``kappa`` is ``None`` when chance agreement is 1 (undefined). Reports
    produced by cross-validation also carry the per-fold breakdown.
    """

    confusion: np.ndarray
    accuracy_total: float
    accuracy_random: float
    kappa: float | None
    classes: tuple[str, ...] = LABELS
    folds: list[FoldResult] = field(default_factory=list)

    @property
    def n(self) -> int:
        return int(self.confusion.sum())

    def _fold_stat(self, attr, fn):
        vals = [getattr(f, attr) for f in self.folds if getattr(f, attr) is not None]
        return float(fn(vals)) if vals else None

    @property
    def mean_accuracy(self) -> float:
        if not self.folds:
            return self.accuracy_total
        return self._fold_stat("accuracy", np.mean)

    @property
    def sd_accuracy(self) -> float | None:
        return self._fold_stat("accuracy", lambda v: np.std(v, ddof=1) if len(v) > 1 else 0.0)

    @property
    def mean_kappa(self) -> float | None:
        if not self.folds:
            return self.kappa
        return self._fold_stat("kappa", np.mean)

    @property
    def sd_kappa(self) -> float | None:
        return self._fold_stat("kappa", lambda v: np.std(v, ddof=1) if len(v) > 1 else 0.0)

    def to_document(self) -> dict:
        doc = {
            "classes": list(self.classes),
            "confusion": self.confusion.astype(int).tolist(),
            "n": self.n,
            "accuracy": self.accuracy_total,
            "accuracy_random": self.accuracy_random,
            "kappa": self.kappa,
        }
        if self.folds:
            doc.update(
                mean_accuracy=self.mean_accuracy,
                sd_accuracy=self.sd_accuracy,
                mean_kappa=self.mean_kappa,
                sd_kappa=self.sd_kappa,
                folds=[vars(f) for f in self.folds],
            )
        return doc


def confusion_matrix(truth: Sequence[str], predicted: Sequence[str], classes=LABELS) -> np.ndarray:
    pos = {c: i for i, c in enumerate(classes)}
    conf = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        conf[pos[t], pos[p]] += 1
    return conf


def report_from_confusion(confusion, classes=LABELS) -> EvalReport:
    """Accuracy, chance agreement and Kappa from integer counts.

    Kappa is evaluated as ``(N*trace - S) / (N^2 - S)`` with
    ``S = sum_k row_k * col_k`` in exact integer arithmetic, so a constant
    predictor (observed == chance agreement) gives exactly 0.
    """
    conf = np.asarray(confusion, dtype=np.int64)
    n = int(conf.sum())
    if n == 0:
        raise ValueError("cannot evaluate an empty confusion matrix")
    trace = int(np.trace(conf))
    s = int(sum(int(r) * int(c) for r, c in zip(conf.sum(axis=1), conf.sum(axis=0))))
    denom = n * n - s
    kappa = (n * trace - s) / denom if denom != 0 else None
    return EvalReport(conf, trace / n, s / (n * n), kappa, tuple(classes))


def evaluate_predictions(truth: Sequence[str], predicted: Sequence[str], classes=LABELS) -> EvalReport:
    if len(truth) == 0:
        raise ValueError("cannot evaluate on empty data")
    return report_from_confusion(confusion_matrix(truth, predicted, classes), classes)


def evaluate(model, data) -> EvalReport:
    """Score ``model.predict(data)`` against ``data.labels``."""
    if len(data) == 0:
        raise ValueError("cannot evaluate on empty data")
    return evaluate_predictions(data.labels, model.predict(data))
