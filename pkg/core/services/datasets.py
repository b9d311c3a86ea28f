"""Dataset checks and summaries used before evaluation and after generation."""

from __future__ import annotations

from core.domain.dataset import Dataset
from core.utils.errors import DatasetValidationError


def validate_for_transfer(ds: Dataset) -> Dataset:
    """Leave-one-subject-out needs 2+ subjects and every class in every subject."""
    if len(ds.subjects) < 2:
        raise DatasetValidationError(
            f"dataset {ds.name!r} has {len(ds.subjects)} subject(s); transfer needs at least 2"
        )
    for subject in ds.subjects:
        counts = subject.class_counts()
        missing = [label for label in ds.labels if label not in counts]
        if missing:
            raise DatasetValidationError(
                f"subject {subject.subject_id!r} of dataset {ds.name!r} has no trials of class(es) {missing}"
            )
    return ds


def describe_dataset(ds: Dataset) -> str:
    lines = [
        f"dataset {ds.name} ({ds.paradigm}, {ds.sampling_rate:g} Hz)",
        f"  subjects: {len(ds.subjects)}  classes: {len(ds.labels)}  "
        f"channels: {ds.channels}  samples: {ds.samples}",
    ]
    for subject in ds.subjects:
        counts = subject.class_counts()
        per_class = ", ".join(f"{label}={counts.get(label, 0)}" for label in ds.labels)
        lines.append(f"  {subject.subject_id}: {len(subject.trials)} trials ({per_class})")
    return "\n".join(lines)
