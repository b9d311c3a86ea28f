from __future__ import annotations

from collections.abc import Iterable
from dataclasses import astuple, dataclass
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import Field, field_validator

from core.domain.base_model import BaseModel
from core.domain.trial import ParadigmConfig
from core.utils.constants import (
    DEFAULT_PIPELINES,
    DEFAULT_SHRINKAGE,
    PROTOCOL_LAMBDAS,
    PROTOCOL_N_TRAIN,
    PROTOCOL_REPETITIONS,
    SCORE_COLUMNS,
)
from core.utils.errors import ValidationError


class EvalConfig(BaseModel):
    """Leave-one-subject-out transfer protocol: calibration sizes, lambda grid, repetitions."""

    n_train: tuple[int, ...] = PROTOCOL_N_TRAIN
    lambdas: tuple[float, ...] = PROTOCOL_LAMBDAS
    repetitions: int = Field(default=PROTOCOL_REPETITIONS, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    pipelines: tuple[str, ...] = DEFAULT_PIPELINES
    paradigm: ParadigmConfig = Field(default_factory=ParadigmConfig)
    regularization: float | Literal["auto"] = DEFAULT_SHRINKAGE
    jobs: int = Field(default=1, ge=1)
    record_timings: bool = False
    cache_source_means: bool = True
    # relative weight per subject id, renormalized over each target's source pool; None is uniform
    source_weights: dict[str, float] | None = None

    @field_validator("n_train")
    @classmethod
    def _check_n(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value or any(n < 1 for n in value):
            raise ValidationError(f"n_train values must be positive integers, got {value}")
        return tuple(sorted(set(value)))

    @field_validator("lambdas")
    @classmethod
    def _check_lambdas(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value or any(not 0.0 <= lam <= 1.0 for lam in value):
            raise ValidationError(f"lambda values must lie in [0, 1], got {value}")
        return tuple(sorted(set(value)))

    @field_validator("pipelines")
    @classmethod
    def _check_pipelines(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        if not value:
            raise ValidationError("at least one pipeline is required")
        return tuple(dict.fromkeys(value))

    @field_validator("regularization")
    @classmethod
    def _check_regularization(cls, value: float | str) -> float | str:
        if value != "auto" and not 0.0 <= float(value) < 1.0:
            raise ValidationError(f"regularization must lie in [0, 1) or be 'auto', got {value}")
        return value

    @field_validator("source_weights")
    @classmethod
    def _check_source_weights(cls, value: dict[str, float] | None) -> dict[str, float] | None:
        if value is None:
            return None
        bad = {k: v for k, v in value.items() if not (np.isfinite(v) and v >= 0.0)}
        if not value or bad:
            raise ValidationError(
                f"source weights must be a non-empty map of finite non-negative values, got {bad or value}"
            )
        return dict(sorted(value.items()))


@dataclass(frozen=True)
class ScoreRow:
    dataset: str
    subject: str
    pipeline: str
    n_train: int
    lam: float
    repetition: int
    balanced_accuracy: float
    train_seconds: float = 0.0
    test_seconds: float = 0.0


class ScoreTable:
    """Long-form evaluation results, one row per (subject, pipeline, n, lambda, repetition)."""

    columns = SCORE_COLUMNS
    sort_key = ["dataset", "subject", "pipeline", "n_train", "lambda", "repetition"]

    def __init__(self, frame: pd.DataFrame):
        missing = [c for c in self.columns if c not in frame.columns]
        if missing:
            raise ValidationError(f"score table lacks columns {missing}")
        scores = frame["balanced_accuracy"].to_numpy(dtype=np.float64)
        if np.any((scores < 0) | (scores > 1)):
            raise ValidationError("balanced accuracy values must lie in [0, 1]")
        frame = frame.loc[:, list(self.columns)].astype(
            {"dataset": str, "subject": str, "pipeline": str, "n_train": int, "repetition": int}
        )
        self.frame = frame.sort_values(self.sort_key, kind="mergesort").reset_index(drop=True)

    @classmethod
    def from_rows(cls, rows: Iterable[ScoreRow]) -> ScoreTable:
        frame = pd.DataFrame([astuple(r) for r in rows], columns=list(cls.columns))
        return cls(frame)

    @classmethod
    def concat(cls, tables: Iterable[ScoreTable]) -> ScoreTable:
        return cls(pd.concat([t.frame for t in tables], ignore_index=True))

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def datasets(self) -> tuple[str, ...]:
        return tuple(sorted(self.frame["dataset"].unique()))

    def summarize(self) -> pd.DataFrame:
        """Mean and spread of balanced accuracy per (dataset, pipeline, n_train, lambda)."""
        grouped = self.frame.groupby(["dataset", "pipeline", "n_train", "lambda"], sort=True)
        out = grouped["balanced_accuracy"].agg(["mean", "std", "count"]).reset_index()
        return out.rename(
            columns={
                "mean": "mean_balanced_accuracy",
                "std": "std_balanced_accuracy",
                "count": "n_scores",
            }
        )
