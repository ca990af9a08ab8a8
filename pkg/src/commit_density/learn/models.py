"""ZeroR, random forest and multiclass LogitBoost classifiers."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from ..dataset import LABELS, Dataset
from ..seeding import derive_seed, rng
from .trees import StumpFitter, Tree, grow_tree, tree_votes


class InvalidInputError(ValueError):
    pass


class DegenerateModelError(InvalidInputError):
    pass


@dataclass(frozen=True)
class ZeroRConfig:
    kind: str = field(default="zeror", init=False)


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 500
    m_try: int | None = None  # default floor(sqrt(p))
    min_leaf: int = 1
    seed: int = 0
    kind: str = field(default="forest", init=False)

    def __post_init__(self):
        if self.n_trees < 1 or self.min_leaf < 1:
            raise ValueError("n_trees and min_leaf must be positive")

    def resolved_m_try(self, p: int) -> int:
        m = self.m_try if self.m_try is not None else max(1, math.isqrt(p))
        if not 1 <= m <= p:
            raise ValueError(f"m_try={m} outside [1, {p}]")
        return m


@dataclass(frozen=True)
class BoostConfig:
    n_iterations: int = 50
    seed: int = 0
    clip: float = 4.0  # working-response clipping bound
    kind: str = field(default="logitboost", init=False)

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be >= 1")


LearnerConfig = ZeroRConfig | ForestConfig | BoostConfig


def config_from_document(doc: dict) -> LearnerConfig:
    doc = dict(doc)
    kind = doc.pop("kind", "forest")
    cls = {"zeror": ZeroRConfig, "forest": ForestConfig, "logitboost": BoostConfig}.get(kind)
    if cls is None:
        raise ValueError(f"unknown learner kind {kind!r}")
    return cls(**doc)


def config_to_document(config: LearnerConfig) -> dict:
    doc = asdict(config)
    doc["kind"] = config.kind
    return doc


@dataclass
class TrainedModel:
    kind: str
    features: tuple[str, ...]
    params: dict
    config: LearnerConfig
    classes: tuple[str, ...] = LABELS

    def _matrix(self, data) -> np.ndarray:
        if isinstance(data, Dataset):
            return data.matrix(self.features)
        X = np.asarray(data, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.features):
            raise InvalidInputError(f"expected {len(self.features)} features, got {X.shape[1]}")
        return X

    def predict_proba(self, data) -> np.ndarray:
        X = self._matrix(data)
        if self.kind == "zeror":
            return np.tile(np.asarray(self.params["priors"], dtype=float), (X.shape[0], 1))
        if self.kind == "forest":
            return _forest_proba(self.params["trees"], X, len(self.classes))
        if self.kind == "logitboost":
            return _boost_proba(self.params, X, len(self.classes))
        raise InvalidInputError(f"unknown model kind {self.kind!r}")

    def predict(self, data) -> np.ndarray:
        proba = self.predict_proba(data)
        return np.asarray(self.classes, dtype=object)[np.argmax(proba, axis=1)]


def _encode(labels: Sequence[str]) -> np.ndarray:
    pos = {c: i for i, c in enumerate(LABELS)}
    try:
        return np.fromiter((pos[lab] for lab in labels), dtype=np.int64, count=len(labels))
    except KeyError as exc:
        raise InvalidInputError(f"label {exc.args[0]!r} not in {LABELS}") from None


def _features(dataset: Dataset, features: Sequence[str] | None) -> tuple[str, ...]:
    feats = tuple(dataset.feature_columns if features is None else features)
    if not feats:
        raise InvalidInputError("no feature columns to train on")
    return feats


def train_zeror(train: Dataset, features: Sequence[str] | None = None) -> TrainedModel:
    """Always predicts the most common training label (ties: a < c < p)."""
    if len(train) == 0:
        raise InvalidInputError("cannot train on an empty dataset")
    y = _encode(train.labels)
    counts = np.bincount(y, minlength=len(LABELS)).astype(float)
    feats = tuple(train.feature_columns if features is None else features)
    return TrainedModel("zeror", feats, {"priors": (counts / counts.sum()).tolist()}, ZeroRConfig())


def _check_classes(y: np.ndarray):
    if len(y) == 0:
        raise InvalidInputError("cannot train on an empty dataset")
    if len(np.unique(y)) < 2:
        raise DegenerateModelError("training data holds a single class")


def train_forest(
    train: Dataset, config: ForestConfig = ForestConfig(), features: Sequence[str] | None = None
) -> TrainedModel:
    """Bootstrap-aggregated Gini trees; probabilities are vote fractions."""
    feats = _features(train, features)
    X = train.matrix(feats)
    y = _encode(train.labels)
    _check_classes(y)
    n, p = X.shape
    m_try = config.resolved_m_try(p)
    trees = []
    gain = np.zeros(p)
    for t in range(config.n_trees):
        gen = rng(config.seed, "tree", t)
        rows = gen.integers(0, n, size=n)
        tree, g = grow_tree(X, y, rows, len(LABELS), m_try, config.min_leaf, derive_seed(config.seed, "mtry", t))
        trees.append(tree)
        gain += g
    params = {"trees": trees, "gini_decrease": (gain / config.n_trees).tolist()}
    return TrainedModel("forest", feats, params, config)


def _forest_proba(trees: list[Tree], X: np.ndarray, n_classes: int) -> np.ndarray:
    votes = np.zeros((X.shape[0], n_classes))
    rows = np.arange(X.shape[0])
    for tree in trees:
        votes[rows, tree_votes(tree, X)] += 1.0
    return votes / len(trees)


def train_logitboost(
    train: Dataset, config: BoostConfig = BoostConfig(), features: Sequence[str] | None = None
) -> TrainedModel:
    """Multiclass additive logistic regression with one regression stump per
    class and round.

    Each round fits, for every class, a weighted least-squares stump to the
    working response ``(y - p) / (p (1 - p))`` with weights ``p (1 - p)``;
    the stump outputs are centred across classes and scaled by ``(J-1)/J``
    before entering the additive model. Class probabilities are the softmax
    of the accumulated scores.
    """
    feats = _features(train, features)
    X = train.matrix(feats)
    y = _encode(train.labels)
    _check_classes(y)
    n = X.shape[0]
    J = len(LABELS)
    Y = np.zeros((n, J))
    Y[np.arange(n), y] = 1.0
    F = np.zeros((n, J))
    P = np.full((n, J), 1.0 / J)
    fitter = StumpFitter(X)
    stumps = []
    eps = 1e-12
    for _ in range(config.n_iterations):
        round_stumps = []
        f = np.empty((n, J))
        for j in range(J):
            w = np.maximum(P[:, j] * (1.0 - P[:, j]), eps)
            z = np.clip((Y[:, j] - P[:, j]) / w, -config.clip, config.clip)
            stump = fitter.fit(z, w)
            round_stumps.append(stump)
            f[:, j] = stump.predict(X)
        F += (J - 1) / J * (f - f.mean(axis=1, keepdims=True))
        P = _softmax(F)
        stumps.append(round_stumps)
    params = {
        "feature": np.array([[s.feature for s in r] for r in stumps], dtype=np.int64),
        "threshold": np.array([[s.threshold for s in r] for r in stumps]),
        "left_value": np.array([[s.left_value for s in r] for r in stumps]),
        "right_value": np.array([[s.right_value for s in r] for r in stumps]),
    }
    return TrainedModel("logitboost", feats, params, config)


def _softmax(F: np.ndarray) -> np.ndarray:
    Z = F - F.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def boost_scores(params: dict, X: np.ndarray, n_classes: int) -> np.ndarray:
    feat = params["feature"]
    thr = params["threshold"]
    lv = params["left_value"]
    rv = params["right_value"]
    J = n_classes
    F = np.zeros((X.shape[0], J))
    for m in range(feat.shape[0]):
        f = np.empty((X.shape[0], J))
        for j in range(J):
            k = feat[m, j]
            if k < 0:
                f[:, j] = lv[m, j]
            else:
                f[:, j] = np.where(X[:, k] <= thr[m, j], lv[m, j], rv[m, j])
        F += (J - 1) / J * (f - f.mean(axis=1, keepdims=True))
    return F


def _boost_proba(params: dict, X: np.ndarray, n_classes: int) -> np.ndarray:
    return _softmax(boost_scores(params, X, n_classes))


def fit(config: LearnerConfig, train: Dataset, features: Sequence[str] | None = None) -> TrainedModel:
    if config.kind == "zeror":
        return train_zeror(train, features)
    if config.kind == "forest":
        return train_forest(train, config, features)
    if config.kind == "logitboost":
        return train_logitboost(train, config, features)
    raise ValueError(f"unknown learner kind {config.kind!r}")
