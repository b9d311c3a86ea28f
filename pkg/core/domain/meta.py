from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import model_validator

from core.domain.base_model import BaseModel
from core.utils.errors import ValidationError

Alternative = Literal["greater", "less", "two-sided"]


class PairedScores(BaseModel):
    """Per-subject scores of two methods on one dataset, averaged over repetitions."""

    dataset: str
    subjects: tuple[str, ...]
    method_a: tuple[float, ...]
    method_b: tuple[float, ...]

    @model_validator(mode="after")
    def _check_pairs(self) -> PairedScores:
        n = len(self.subjects)
        if len(self.method_a) != n or len(self.method_b) != n:
            raise ValidationError(f"dataset {self.dataset!r}: unequal score vector lengths")
        if n < 2:
            raise ValidationError(f"dataset {self.dataset!r}: need at least 2 subjects, got {n}")
        scores = np.asarray(self.method_a + self.method_b)
        if np.any((scores < 0) | (scores > 1)):
            raise ValidationError(f"dataset {self.dataset!r}: scores must lie in [0, 1]")
        return self

    @property
    def differences(self) -> np.ndarray:
        return np.asarray(self.method_a) - np.asarray(self.method_b)


class DatasetMeta(BaseModel):
    dataset: str
    n_subjects: int
    smd: float
    mean_difference: float
    p_value: float
    stars: str


class MetaResult(BaseModel):
    """Per-dataset effect sizes and p-values plus their Stouffer combination."""

    method_a: str
    method_b: str
    n_train: int
    lam: float
    alternative: Alternative
    datasets: tuple[DatasetMeta, ...]
    combined_smd: float
    combined_p_value: float
    stars: str

    @property
    def total_subjects(self) -> int:
        return sum(d.n_subjects for d in self.datasets)
