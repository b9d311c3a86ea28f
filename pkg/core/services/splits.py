"""
Calibration splits and scoring for leave-one-subject-out transfer.

A split draws ``n`` calibration trials from the target subject, stratified
over classes, and keeps the rest for testing. For a fixed (seed, subject,
repetition) the per-class permutations do not depend on ``n``, so larger
calibration sets contain the smaller ones.
"""

from __future__ import annotations

from collections.abc import Sequence
import logging

import numpy as np
from sklearn.metrics import balanced_accuracy_score

from core.domain.dataset import SubjectRecord
from core.domain.trial import Trial
from core.utils.errors import InfeasibleSplitError, ValidationError
from core.utils.seeding import split_rng

logger = logging.getLogger(__name__)


def balanced_accuracy(truth: Sequence[str], predicted: Sequence[str]) -> float:
    """Mean per-class recall over the classes present in ``truth``."""
    if len(truth) == 0:
        raise ValidationError("balanced accuracy of an empty test set is undefined")
    if len(truth) != len(predicted):
        raise ValidationError(f"{len(truth)} true labels but {len(predicted)} predictions")
    return float(balanced_accuracy_score(list(truth), list(predicted)))


def max_calibration_trials(subject: SubjectRecord) -> int:
    """Largest n that still leaves one test trial of every class."""
    return sum(count - 1 for count in subject.class_counts().values())


def stratified_allocation(class_counts: dict[str, int], n: int) -> dict[str, int]:
    """Spread ``n`` over the sorted classes round-robin, capped at count - 1 per class."""
    labels = sorted(class_counts)
    if n < len(labels):
        raise InfeasibleSplitError(
            f"n={n} cannot cover {len(labels)} classes; need n >= {len(labels)}"
        )
    capacity = {label: class_counts[label] - 1 for label in labels}
    if n > sum(capacity.values()):
        raise InfeasibleSplitError(
            f"n={n} exceeds the {sum(capacity.values())} trials available while keeping "
            f"one test trial per class (per-class counts {class_counts})"
        )
    allocation = dict.fromkeys(labels, 0)
    remaining = n
    while remaining:
        for label in labels:
            if remaining and allocation[label] < capacity[label]:
                allocation[label] += 1
                remaining -= 1
    return allocation


def split_indices(
    subject: SubjectRecord, n: int, repetition: int, master_seed: int
) -> tuple[list[int], list[int]]:
    """Trial indices of the calibration and test sets, each in recording order."""
    counts = subject.class_counts()
    try:
        allocation = stratified_allocation(counts, n)
    except InfeasibleSplitError as e:
        e.add_note(f"subject {subject.subject_id!r}")
        raise
    rng = split_rng(master_seed, subject.subject_id, repetition)
    labels = np.asarray(subject.labels)
    chosen: list[int] = []
    for label in sorted(counts):
        indices = np.flatnonzero(labels == label)
        order = rng.permutation(indices)
        chosen.extend(int(i) for i in order[: allocation[label]])
    taken = set(chosen)
    return sorted(taken), [i for i in range(len(subject.trials)) if i not in taken]


def transfer_split(
    subject: SubjectRecord, n: int, repetition: int, master_seed: int
) -> tuple[list[Trial], list[Trial]]:
    """Class-stratified random draw of ``n`` calibration trials; the complement is the test set."""
    train_idx, test_idx = split_indices(subject, n, repetition, master_seed)
    return [subject.trials[i] for i in train_idx], [subject.trials[i] for i in test_idx]
