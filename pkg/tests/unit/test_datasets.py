from __future__ import annotations

import numpy as np
import pytest

from core.domain.dataset import Dataset, SubjectRecord
from core.domain.trial import Trial
from core.services.datasets import describe_dataset, validate_for_transfer
from core.utils.errors import DatasetValidationError, ValidationError
from tests.factories import TrialFactory

pytestmark = pytest.mark.unit


def _subject(subject_id: str, labels: list[str], shape: tuple[int, int] = (2, 8)) -> SubjectRecord:
    trials = [Trial(signal=np.ones(shape) * (i + 1), label=label) for i, label in enumerate(labels)]
    return SubjectRecord(subject_id=subject_id, trials=tuple(trials))


def _dataset(*subjects: SubjectRecord, labels=("a", "b")) -> Dataset:
    return Dataset(name="d", sampling_rate=128.0, labels=labels, subjects=subjects)


def test_trial_rejects_bad_signals():
    with pytest.raises(ValidationError):
        Trial(signal=np.ones(5), label="a")
    with pytest.raises(ValidationError):
        Trial(signal=[[1.0, float("nan")]], label="a")


def test_dataset_rejects_inconsistent_content():
    with pytest.raises(DatasetValidationError):
        _dataset()
    with pytest.raises(DatasetValidationError):
        _dataset(_subject("s1", ["a", "b"]), _subject("s1", ["a", "b"]))
    with pytest.raises(DatasetValidationError):
        _dataset(_subject("s1", ["a", "b"]), _subject("s2", ["a", "b"], shape=(3, 8)))
    with pytest.raises(DatasetValidationError):
        _dataset(_subject("s1", ["a", "c"]))
    with pytest.raises(DatasetValidationError):
        _dataset(_subject("s1", ["a", "b"]), labels=("b", "a"))


def test_subject_rejects_mixed_shapes():
    trials = TrialFactory(channels=2).build("a") + TrialFactory(channels=3).build("a")
    with pytest.raises(DatasetValidationError):
        SubjectRecord(subject_id="s1", trials=tuple(trials))


def test_transfer_validation():
    ok = _dataset(_subject("s1", ["a", "b"]), _subject("s2", ["b", "a"]))
    assert validate_for_transfer(ok) is ok
    with pytest.raises(DatasetValidationError, match="at least 2"):
        validate_for_transfer(_dataset(_subject("s1", ["a", "b"])))
    with pytest.raises(DatasetValidationError, match="s2"):
        validate_for_transfer(_dataset(_subject("s1", ["a", "b"]), _subject("s2", ["a", "a"])))


def test_describe_lists_every_subject(small_dataset):
    text = describe_dataset(small_dataset)
    assert f"subjects: {len(small_dataset.subjects)}" in text
    for subject in small_dataset.subjects:
        assert subject.subject_id in text
