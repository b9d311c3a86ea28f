"""Versioned JSON container for fitted MDM/MDWM models."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from core.domain.classes import ClassMeans, TrainedModel
from core.domain.spd import SpdMatrix
from core.utils.constants import MODEL_FORMAT, MODEL_FORMAT_VERSION
from core.utils.errors import DimensionInconsistencyError, MalformedHeaderError, UnknownFormatVersionError

logger = logging.getLogger(__name__)


def model_to_dict(model: TrainedModel) -> dict[str, Any]:
    # json writes floats with repr, the shortest string that parses back to the same double
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "lambda": model.lam,
        "feature_key": model.means.feature_key,
        "dim": model.means.dim,
        "means": {label: m.values.tolist() for label, m in model.means.means.items()},
    }


def model_from_dict(raw: Any, source: str = "<model>") -> TrainedModel:
    if not isinstance(raw, dict) or raw.get("format") != MODEL_FORMAT:
        raise MalformedHeaderError(f"{source} is not a {MODEL_FORMAT!r} document")
    if raw.get("version") != MODEL_FORMAT_VERSION:
        raise UnknownFormatVersionError(
            f"{source} has model version {raw.get('version')!r}; expected {MODEL_FORMAT_VERSION}"
        )
    try:
        dim = int(raw["dim"])
        blocks = {str(label): np.asarray(values, dtype=np.float64) for label, values in raw["means"].items()}
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise MalformedHeaderError(f"{source} is malformed: {e}") from e
    for label, block in blocks.items():
        if block.shape != (dim, dim):
            raise DimensionInconsistencyError(
                f"{source}: mean of class {label!r} has shape {block.shape}, header says {dim}x{dim}"
            )
    means = ClassMeans(
        means={label: SpdMatrix(block) for label, block in blocks.items()},
        feature_key=raw.get("feature_key"),
    )
    return TrainedModel(means=means, lam=raw.get("lambda"))


def save_model(model: TrainedModel, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")
    logger.info(f"saved model with classes {list(model.means.labels)} to {target}")
    return target


def load_model(path: str | Path) -> TrainedModel:
    source = Path(path)
    try:
        raw = json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise MalformedHeaderError(f"{source} is not valid JSON: {e}") from e
    return model_from_dict(raw, str(source))
