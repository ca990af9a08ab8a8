"""Versioned JSON model documents."""

from __future__ import annotations

import json
import os

import numpy as np

from .compound import CompoundModel, Side
from .models import TrainedModel, config_from_document, config_to_document
from .trees import Tree

SCHEMA_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _params_to_document(model: TrainedModel) -> dict:
    p = model.params
    if model.kind == "zeror":
        return {"priors": list(p["priors"])}
    if model.kind == "forest":
        return {"trees": [t.to_document() for t in p["trees"]], "gini_decrease": list(p["gini_decrease"])}
    if model.kind == "logitboost":
        return {k: np.asarray(v).tolist() for k, v in p.items()}
    raise ModelFormatError(f"unknown model kind {model.kind!r}")


def _params_from_document(kind: str, doc: dict) -> dict:
    if kind == "zeror":
        return {"priors": list(doc["priors"])}
    if kind == "forest":
        return {"trees": [Tree.from_document(t) for t in doc["trees"]], "gini_decrease": list(doc["gini_decrease"])}
    if kind == "logitboost":
        return {
            "feature": np.asarray(doc["feature"], dtype=np.int64),
            "threshold": np.asarray(doc["threshold"], dtype=float),
            "left_value": np.asarray(doc["left_value"], dtype=float),
            "right_value": np.asarray(doc["right_value"], dtype=float),
        }
    raise ModelFormatError(f"unknown model kind {kind!r}")


def _trained_to_document(model: TrainedModel) -> dict:
    return {
        "kind": model.kind,
        "features": list(model.features),
        "classes": list(model.classes),
        "config": config_to_document(model.config),
        "params": _params_to_document(model),
    }


def _trained_from_document(doc: dict) -> TrainedModel:
    return TrainedModel(
        kind=doc["kind"],
        features=tuple(doc["features"]),
        params=_params_from_document(doc["kind"], doc["params"]),
        config=config_from_document(doc["config"]),
        classes=tuple(doc["classes"]),
    )


def model_to_document(model: TrainedModel | CompoundModel) -> dict:
    if isinstance(model, CompoundModel):
        body = {
            "kind": "compound",
            "vocabulary": list(model.vocabulary),
            "left": {"group": model.left.group, "model": _trained_to_document(model.left.model)},
            "right": {"group": model.right.group, "model": _trained_to_document(model.right.model)},
        }
    else:
        body = _trained_to_document(model)
    return {"schema_version": SCHEMA_VERSION, **body}


def model_from_document(doc: dict) -> TrainedModel | CompoundModel:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelFormatError(f"model schema version {version!r} is not supported (expected {SCHEMA_VERSION})")
    try:
        if doc["kind"] == "compound":
            return CompoundModel(
                Side(doc["left"]["group"], _trained_from_document(doc["left"]["model"])),
                Side(doc["right"]["group"], _trained_from_document(doc["right"]["model"])),
                tuple(doc["vocabulary"]),
            )
        return _trained_from_document(doc)
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc


def dumps_model(model) -> str:
    return json.dumps(model_to_document(model), sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_model(model))


def load_model(path: str | os.PathLike):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not JSON: {exc}") from exc
    return model_from_document(doc)
