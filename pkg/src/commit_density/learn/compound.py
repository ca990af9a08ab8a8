"""Two-sided compound models routed by commit-message keywords."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..dataset import GROUP_ROLES, Dataset, LabeledSample, has_keyword, vertical_split
from .models import InvalidInputError, LearnerConfig, TrainedModel, fit

MODES = ("routed", "vote")


@dataclass(frozen=True)
class SideConfig:
    group: str
    learner: LearnerConfig

    def __post_init__(self):
        if self.group not in GROUP_ROLES:
            raise ValueError(f"unknown group {self.group!r}; expected one of {sorted(GROUP_ROLES)}")


@dataclass
class Side:
    group: str
    model: TrainedModel


@dataclass
class CompoundModel:
    """``left`` handles messages containing a vocabulary keyword, ``right`` the rest."""

    left: Side
    right: Side
    vocabulary: tuple[str, ...]

    def __post_init__(self):
        if not self.vocabulary:
            raise InvalidInputError("compound model needs a non-empty vocabulary")
        if self.left.model.classes != self.right.model.classes:
            raise InvalidInputError("left and right models must share the class list")

    @property
    def kind(self) -> str:
        return "compound"

    @property
    def classes(self) -> tuple[str, ...]:
        return self.left.model.classes

    @property
    def features(self) -> tuple[str, ...]:
        seen = dict.fromkeys(self.left.model.features)
        seen.update(dict.fromkeys(self.right.model.features))
        return tuple(seen)

    def routes_left(self, messages: Sequence[str]) -> np.ndarray:
        return np.fromiter((has_keyword(m, self.vocabulary) for m in messages), dtype=bool, count=len(messages))

    def predict_proba(self, data: Dataset, mode: str = "routed") -> np.ndarray:
        """Routed probabilities, or with ``mode="vote"`` the normalised sum
        of both sides' probabilities."""
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        pl = self.left.model.predict_proba(data)
        pr = self.right.model.predict_proba(data)
        if mode == "vote":
            return (pl + pr) / 2.0
        messages = data.messages
        if messages is None:
            raise InvalidInputError("routing needs a message column")
        left = self.routes_left(messages)
        return np.where(left[:, None], pl, pr)

    def predict(self, data: Dataset, mode: str = "routed") -> np.ndarray:
        proba = self.predict_proba(data, mode)
        return np.asarray(self.classes, dtype=object)[np.argmax(proba, axis=1)]


def train_compound(
    left: SideConfig, right: SideConfig, vocabulary: Sequence[str], train: Dataset
) -> CompoundModel:
    """Train each side on its own feature group over the full training set."""
    if train.messages is None:
        raise InvalidInputError("compound training needs a message column")
    sides = []
    for side in (left, right):
        view = vertical_split(train, side.group)
        sides.append(Side(side.group, fit(side.learner, view)))
    return CompoundModel(sides[0], sides[1], tuple(vocabulary))


def _side_vector(model: TrainedModel, features: Mapping[str, float]) -> np.ndarray:
    missing = [f for f in model.features if f not in features]
    if missing:
        raise InvalidInputError(f"sample lacks features {missing}")
    return np.array([[float(features[f]) for f in model.features]])


def predict_compound(
    model: CompoundModel, sample: LabeledSample, mode: str = "routed"
) -> tuple[str, dict[str, float]]:
    """Label and class probabilities for one sample.

    ``routed`` consults only the side chosen by the message; ``vote`` adds
    both sides' class probabilities and takes the argmax (the returned
    probabilities are the sum halved so they still add up to one).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    pl = model.left.model.predict_proba(_side_vector(model.left.model, sample.features))[0]
    pr = model.right.model.predict_proba(_side_vector(model.right.model, sample.features))[0]
    if mode == "vote":
        proba = pl + pr
        label = model.classes[int(np.argmax(proba))]
        return label, dict(zip(model.classes, (proba / 2.0).tolist()))
    proba = pl if has_keyword(sample.message_text, model.vocabulary) else pr
    return model.classes[int(np.argmax(proba))], dict(zip(model.classes, proba.tolist()))


def compound_pairs(groups: Sequence[str] = ("keywords", "changes", "density", "combined")) -> list[tuple[str, str]]:
    """All ordered (left, right) group pairs."""
    return [(a, b) for a in groups for b in groups]
