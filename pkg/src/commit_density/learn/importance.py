"""Variable importance: per-class single-feature ROC AUC and forest Gini decrease."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from ..dataset import LABELS, Dataset
from .models import InvalidInputError, TrainedModel


def auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Area under the ROC curve of ``scores`` ranking ``positive`` rows first
    (Mann-Whitney U with mid-ranks for ties). NaN if either class is empty."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_auc_importance(
    dataset: Dataset, features: Sequence[str] | None = None, fold: bool = True
) -> pd.DataFrame:
    """One-vs-rest AUC of each feature for each label (rows: features, columns: labels).

    With ``fold`` the score is ``max(AUC, 1 - AUC)`` so a perfect inverse
    ranker counts as fully informative. Constant features score 0.5.
    """
    features = list(dataset.feature_columns if features is None else features)
    labels = dataset.labels
    if len(set(labels)) < 2:
        raise InvalidInputError("need at least two classes")
    X = dataset.matrix(features)
    out = np.empty((len(features), len(LABELS)))
    for i in range(len(features)):
        x = X[:, i]
        constant = bool(np.all(x == x[0]))
        for j, lab in enumerate(LABELS):
            a = 0.5 if constant else auc(x, labels == lab)
            out[i, j] = max(a, 1.0 - a) if fold and not np.isnan(a) else a
    return pd.DataFrame(out, index=features, columns=list(LABELS))


def forest_importance(model: TrainedModel) -> dict[str, float]:
    """Total Gini decrease per feature scaled so the top feature scores 100."""
    if model.kind != "forest":
        raise InvalidInputError(f"forest importance needs a forest, got {model.kind!r}")
    gain = np.maximum(np.asarray(model.params["gini_decrease"], dtype=float), 0.0)
    top = gain.max() if len(gain) else 0.0
    scaled = gain / top * 100.0 if top > 0 else np.zeros_like(gain)
    return dict(zip(model.features, scaled.tolist()))


def rank_features(importance: dict[str, float]) -> list[str]:
    """Most important first; ties keep the model's feature order."""
    order = list(importance)
    return sorted(order, key=lambda f: (-importance[f], order.index(f)))
