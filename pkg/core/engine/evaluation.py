"""
Leave-one-subject-out transfer evaluation.

Each subject in turn is the target; the remaining subjects form the source
pool. Subjects are independent work units and run on a joblib worker pool;
rows are gathered into a ScoreTable whose sort order does not depend on the
worker count.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from contextlib import contextmanager
import logging
import time

from joblib import Parallel, delayed
import numpy as np

from core.domain.classes import ClassMeans
from core.domain.dataset import Dataset, SubjectRecord
from core.domain.scores import EvalConfig, ScoreRow, ScoreTable
from core.domain.spd import SpdMatrix
from core.services.classifiers import fit_source_means, predict_many
from core.services.datasets import validate_for_transfer
from core.services.features import CovarianceFeatures
from core.services.pipelines import PipelineRegistry
from core.services.splits import balanced_accuracy, max_calibration_trials, split_indices
from core.utils.errors import InfeasibleSplitError, MdwmError, ValidationError

logger = logging.getLogger(__name__)


def subject_capacities(ds: Dataset) -> dict[str, int]:
    return {s.subject_id: max_calibration_trials(s) for s in ds.subjects}


def check_feasible(ds: Dataset, n_values: Sequence[int]) -> None:
    """Every requested n must cover all classes and leave a test trial per class in every subject."""
    k = len(ds.labels)
    capacities = subject_capacities(ds)
    bad = [n for n in n_values if n < k or any(n > c for c in capacities.values())]
    if bad:
        listing = ", ".join(f"{sid}: {c}" for sid, c in capacities.items())
        raise InfeasibleSplitError(
            f"n value(s) {bad} infeasible for dataset {ds.name!r}: n must lie in "
            f"[{k}, per-subject capacity]; capacities {listing}"
        )


def feasible_n_grid(ds: Dataset, n_values: Sequence[int]) -> tuple[int, ...]:
    """The subset of ``n_values`` that every subject supports."""
    k = len(ds.labels)
    ceiling = min(subject_capacities(ds).values())
    kept = tuple(n for n in n_values if k <= n <= ceiling)
    dropped = sorted(set(n_values) - set(kept))
    if dropped:
        logger.warning(f"dropping infeasible n values {dropped} (allowed range [{k}, {ceiling}])")
    return kept


def feature_extractor(sources: Sequence[SubjectRecord], config: EvalConfig) -> CovarianceFeatures:
    """Feature extractor fitted on source trials only."""
    return CovarianceFeatures(config.paradigm, config.regularization).fit(
        [t for s in sources for t in s.trials]
    )


def source_weights_for(
    sources: Sequence[SubjectRecord], weights: Mapping[str, float] | None
) -> tuple[float, ...] | None:
    """Relative per-subject weights renormalized over this source pool; None stays uniform."""
    if weights is None:
        return None
    missing = [s.subject_id for s in sources if s.subject_id not in weights]
    if missing:
        raise ValidationError(f"no source weight given for subject(s) {missing}")
    raw = np.array([weights[s.subject_id] for s in sources], dtype=np.float64)
    if raw.sum() <= 0.0:
        raise ValidationError("source weights of the pool are all zero")
    return tuple(float(v) for v in raw / raw.sum())


def source_means_for(ds: Dataset, target_id: str, config: EvalConfig) -> ClassMeans:
    """Pooled class means of every subject except ``target_id``."""
    sources = [s for s in ds.subjects if s.subject_id != target_id]
    return fit_source_means(
        sources, source_weights_for(sources, config.source_weights), feature_extractor(sources, config)
    )


@contextmanager
def _annotate(**coordinates: object) -> Iterator[None]:
    try:
        yield
    except MdwmError as e:
        e.add_note(", ".join(f"{k}={v}" for k, v in coordinates.items()))
        raise


def evaluate_subject(ds: Dataset, target_index: int, config: EvalConfig) -> list[ScoreRow]:
    """All score rows with ``ds.subjects[target_index]`` as transfer target."""
    target = ds.subjects[target_index]
    sources = [s for i, s in enumerate(ds.subjects) if i != target_index]
    pipelines = PipelineRegistry.resolve(config.pipelines)
    logger.info(f"{ds.name}: target {target.subject_id} ({target_index + 1}/{len(ds.subjects)})")

    with _annotate(subject=target.subject_id, stage="source means"):
        features = feature_extractor(sources, config)
        weights = source_weights_for(sources, config.source_weights)
        cached = fit_source_means(sources, weights, features) if config.cache_source_means else None
        target_features: list[SpdMatrix] = features.transform(target.trials)

    def source_means() -> ClassMeans:
        return cached if cached is not None else fit_source_means(sources, weights, features)

    labels = target.labels
    rows: list[ScoreRow] = []
    for n in config.n_train:
        for repetition in range(config.repetitions):
            with _annotate(subject=target.subject_id, n=n, repetition=repetition):
                train_idx, test_idx = split_indices(target, n, repetition, config.seed)
            calibration = [(target_features[i], labels[i]) for i in train_idx]
            queries = [target_features[i] for i in test_idx]
            truth = [labels[i] for i in test_idx]
            for pipeline in pipelines:
                lambdas = config.lambdas if pipeline.uses_lambda else config.lambdas[:1]
                for lam in lambdas:
                    with _annotate(
                        subject=target.subject_id, pipeline=pipeline.name, n=n, lam=lam, repetition=repetition
                    ):
                        start = time.perf_counter()
                        means = pipeline.fit(calibration, source_means(), lam, feature_key=features.key)
                        fitted = time.perf_counter()
                        predicted = predict_many(means, queries)
                        done = time.perf_counter()
                        score = balanced_accuracy(truth, predicted)
                    train_s, test_s = (fitted - start, done - fitted) if config.record_timings else (0.0, 0.0)
                    emitted = (lam,) if pipeline.uses_lambda else config.lambdas
                    rows.extend(
                        ScoreRow(
                            dataset=ds.name,
                            subject=target.subject_id,
                            pipeline=pipeline.name,
                            n_train=n,
                            lam=lam_out,
                            repetition=repetition,
                            balanced_accuracy=score,
                            train_seconds=train_s,
                            test_seconds=test_s,
                        )
                        for lam_out in emitted
                    )
    return rows


def run_transfer_evaluation(ds: Dataset, config: EvalConfig) -> ScoreTable:
    """Score every (subject, pipeline, n, lambda, repetition) cell of the protocol."""
    validate_for_transfer(ds)
    PipelineRegistry.resolve(config.pipelines)
    paradigm = config.paradigm
    if paradigm.kind == "filter_bank" and paradigm.sampling_rate != ds.sampling_rate:
        raise ValidationError(
            f"filter bank sampling rate {paradigm.sampling_rate} differs from dataset rate {ds.sampling_rate}"
        )
    check_feasible(ds, config.n_train)
    logger.info(
        f"evaluating {ds.name}: {len(ds.subjects)} subjects, n={list(config.n_train)}, "
        f"lambda={list(config.lambdas)}, {config.repetitions} repetitions, jobs={config.jobs}"
    )
    per_subject = Parallel(n_jobs=config.jobs)(
        delayed(evaluate_subject)(ds, i, config) for i in range(len(ds.subjects))
    )
    return ScoreTable.from_rows(row for rows in per_subject for row in rows)
