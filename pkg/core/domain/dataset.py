from __future__ import annotations

from collections import Counter
from typing import Literal

from pydantic import Field, model_validator

from core.domain.base_model import BaseModel
from core.domain.trial import Trial
from core.utils.errors import DatasetValidationError

DatasetParadigm = Literal["synthetic", "mi", "p300", "ssvep"]


class SubjectRecord(BaseModel):
    """Labeled trials of one subject; the unit of transfer."""

    subject_id: str
    trials: tuple[Trial, ...]

    @model_validator(mode="after")
    def _check_trials(self) -> SubjectRecord:
        if not self.subject_id:
            raise DatasetValidationError("subject_id must be non-empty")
        if not self.trials:
            raise DatasetValidationError(f"subject {self.subject_id!r} has no trials")
        shapes = {t.signal.shape for t in self.trials}
        if len(shapes) != 1:
            raise DatasetValidationError(
                f"subject {self.subject_id!r} mixes trial shapes {sorted(shapes)}"
            )
        return self

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.trials)

    def class_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(self.labels).items()))


class Dataset(BaseModel):
    """Subjects of one recording paradigm sharing channels, sample count and label set."""

    name: str
    paradigm: DatasetParadigm = "synthetic"
    sampling_rate: float = Field(gt=0)
    labels: tuple[str, ...]
    subjects: tuple[SubjectRecord, ...]

    @model_validator(mode="after")
    def _check_consistency(self) -> Dataset:
        if not self.subjects:
            raise DatasetValidationError(f"dataset {self.name!r} has no subjects")
        if len(set(self.labels)) != len(self.labels) or len(self.labels) < 2:
            raise DatasetValidationError(
                f"dataset {self.name!r} needs at least 2 unique class labels, got {self.labels}"
            )
        if list(self.labels) != sorted(self.labels):
            raise DatasetValidationError("dataset labels must be listed in sorted order")
        ids = [s.subject_id for s in self.subjects]
        if len(set(ids)) != len(ids):
            raise DatasetValidationError(f"duplicate subject ids in dataset {self.name!r}")
        shape = self.subjects[0].trials[0].signal.shape
        known = set(self.labels)
        for subject in self.subjects:
            other = subject.trials[0].signal.shape
            if other != shape:
                raise DatasetValidationError(
                    f"subject {subject.subject_id!r} has trials of shape {other}, expected {shape}"
                )
            unknown = set(subject.labels) - known
            if unknown:
                raise DatasetValidationError(
                    f"subject {subject.subject_id!r} uses undeclared labels {sorted(unknown)}"
                )
        return self

    @property
    def channels(self) -> int:
        return self.subjects[0].trials[0].channels

    @property
    def samples(self) -> int:
        return self.subjects[0].trials[0].samples

    def subject(self, subject_id: str) -> SubjectRecord:
        for s in self.subjects:
            if s.subject_id == subject_id:
                return s
        raise DatasetValidationError(f"no subject {subject_id!r} in dataset {self.name!r}")


class SynthConfig(BaseModel):
    """Parameters of the seeded synthetic multi-subject generator.

    The three scales are tangent-space standard deviations: ``class_separation``
    spreads the global class centres, ``subject_variability`` moves each centre per
    subject, and ``trial_noise`` perturbs the covariance of every trial.
    """

    seed: int = Field(default=7, ge=0, lt=2**64)
    subjects: int = Field(default=8, ge=1)
    classes: int = Field(default=4, ge=2)
    channels: int = Field(default=8, ge=1)
    samples: int = Field(default=256, ge=2)
    trials_per_class: int = Field(default=40, ge=1)
    sampling_rate: float = Field(default=256.0, gt=0)
    class_separation: float = Field(default=0.06, ge=0)
    subject_variability: float = Field(default=0.05, ge=0)
    trial_noise: float = Field(default=0.14, ge=0)

    def class_labels(self) -> tuple[str, ...]:
        return tuple(f"class_{k + 1:02d}" for k in range(self.classes))

    def subject_ids(self) -> tuple[str, ...]:
        return tuple(f"S{s + 1:02d}" for s in range(self.subjects))
