from __future__ import annotations

from collections.abc import Mapping

import numpy as np
from pydantic import ConfigDict, Field, field_validator, model_validator

from core.domain.base_model import BaseModel
from core.domain.spd import SpdMatrix
from core.utils.errors import DimensionMismatchError, LabelSetMismatchError, ValidationError


class ClassMeans(BaseModel):
    """Class label -> mean SPD matrix, kept in canonical (sorted) label order.

    ``feature_key`` records the feature configuration the means were fitted on,
    so target and source models built from different recipes cannot be mixed.
    """

    means: dict[str, SpdMatrix]
    feature_key: str | None = None

    @field_validator("means", mode="before")
    @classmethod
    def _sort_labels(cls, value: Mapping[str, SpdMatrix]) -> dict[str, SpdMatrix]:
        return {label: value[label] for label in sorted(value)}

    @model_validator(mode="after")
    def _check_means(self) -> ClassMeans:
        if len(self.means) < 2:
            raise LabelSetMismatchError(
                f"a classifier needs at least 2 classes, got {list(self.means)}"
            )
        dims = {m.dim for m in self.means.values()}
        if len(dims) != 1:
            raise DimensionMismatchError(f"class means have mixed dimensions {sorted(dims)}")
        return self

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.means)

    @property
    def dim(self) -> int:
        return next(iter(self.means.values())).dim

    def __getitem__(self, label: str) -> SpdMatrix:
        return self.means[label]


class TransferParams(BaseModel):
    """Trade-off between target (lambda = 0) and source (lambda = 1) class means.

    ``source_subject_weights`` is None for uniform weights over source subjects.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda")
    source_subject_weights: tuple[float, ...] | None = None

    @model_validator(mode="after")
    def _check_params(self) -> TransferParams:
        if not (np.isfinite(self.lam) and 0.0 <= self.lam <= 1.0):
            raise ValidationError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.source_subject_weights is not None:
            check_simplex(self.source_subject_weights, "source_subject_weights")
        return self


class TrainedModel(BaseModel):
    """A fitted MDM/MDWM model: the unit written by the model store."""

    means: ClassMeans
    lam: float | None = None


def check_simplex(weights: tuple[float, ...] | list[float] | np.ndarray, what: str) -> np.ndarray:
    """Validate a non-negative weight vector summing to one (tolerance 1e-9)."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError(f"{what} must be a non-empty vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValidationError(f"{what} must be finite and non-negative")
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise ValidationError(f"{what} must sum to 1, got {float(w.sum())!r}")
    return w
