from __future__ import annotations

from collections import Counter

import pytest

from core.domain.dataset import SubjectRecord
from core.services.splits import (
    balanced_accuracy,
    max_calibration_trials,
    split_indices,
    stratified_allocation,
    transfer_split,
)
from core.utils.errors import InfeasibleSplitError, ValidationError
from tests.factories import TrialFactory

pytestmark = pytest.mark.unit


def _subject(per_class: dict[str, int], subject_id: str = "S01") -> SubjectRecord:
    trials = []
    for seed, (label, count) in enumerate(sorted(per_class.items())):
        trials.extend(TrialFactory(channels=2, samples=8, seed=seed).build(label, count))
    return SubjectRecord(subject_id=subject_id, trials=tuple(trials))


def test_balanced_accuracy_examples():
    assert balanced_accuracy(["a", "b", "a"], ["a", "b", "a"]) == 1.0
    truth = ["a"] * 10 + ["b"] * 10
    predicted = ["a"] * 10 + ["b"] * 5 + ["a"] * 5
    assert balanced_accuracy(truth, predicted) == pytest.approx(0.75)
    assert balanced_accuracy(["a", "a", "b", "b"], ["a"] * 4) == pytest.approx(0.5)


def test_balanced_accuracy_errors():
    with pytest.raises(ValidationError):
        balanced_accuracy([], [])
    with pytest.raises(ValidationError):
        balanced_accuracy(["a"], ["a", "b"])


def test_allocation_is_even_with_remainder_to_first_classes():
    counts = {"a": 10, "b": 10, "c": 10, "d": 10}
    assert stratified_allocation(counts, 8) == {"a": 2, "b": 2, "c": 2, "d": 2}
    assert stratified_allocation(counts, 10) == {"a": 3, "b": 3, "c": 2, "d": 2}


def test_allocation_respects_per_class_capacity():
    assert stratified_allocation({"a": 2, "b": 10}, 6) == {"a": 1, "b": 5}


def test_allocation_rejects_infeasible_n():
    with pytest.raises(InfeasibleSplitError):
        stratified_allocation({"a": 5, "b": 5}, 1)
    with pytest.raises(InfeasibleSplitError):
        stratified_allocation({"a": 5, "b": 5}, 9)


def test_split_is_stratified_and_complementary():
    subject = _subject({"a": 6, "b": 6, "c": 6, "d": 6})
    train, test = transfer_split(subject, 8, repetition=0, master_seed=1)
    assert Counter(t.label for t in train) == {"a": 2, "b": 2, "c": 2, "d": 2}
    assert len(train) + len(test) == 24
    assert {id(t) for t in train}.isdisjoint(id(t) for t in test)


def test_split_boundary_keeps_one_test_trial_per_class():
    subject = _subject({"a": 4, "b": 4})
    assert max_calibration_trials(subject) == 6
    _, test = transfer_split(subject, 6, repetition=3, master_seed=0)
    assert Counter(t.label for t in test) == {"a": 1, "b": 1}


def test_split_is_deterministic_and_varies_with_repetition():
    subject = _subject({"a": 10, "b": 10})
    first = split_indices(subject, 4, 0, 42)
    assert split_indices(subject, 4, 0, 42) == first
    assert any(split_indices(subject, 4, rep, 42) != first for rep in range(1, 5))


def test_split_depends_on_subject_id():
    a = split_indices(_subject({"a": 10, "b": 10}, "S01"), 4, 0, 42)
    others = [split_indices(_subject({"a": 10, "b": 10}, f"S{i:02d}"), 4, 0, 42) for i in range(2, 8)]
    assert any(o != a for o in others)


def test_larger_calibration_sets_contain_smaller_ones():
    subject = _subject({"a": 10, "b": 10, "c": 10})
    small, _ = split_indices(subject, 3, 2, 9)
    large, _ = split_indices(subject, 12, 2, 9)
    assert set(small) <= set(large)


def test_split_error_names_the_subject():
    with pytest.raises(InfeasibleSplitError) as info:
        transfer_split(_subject({"a": 2, "b": 2}, "S07"), 3, 0, 0)
    assert any("S07" in note for note in info.value.__notes__)
