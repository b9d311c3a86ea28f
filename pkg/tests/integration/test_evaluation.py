from __future__ import annotations

import logging

import numpy as np
import pytest

from core.domain.dataset import SubjectRecord
from core.domain.scores import EvalConfig
from core.domain.trial import ParadigmConfig
from core.engine.evaluation import (
    check_feasible,
    feasible_n_grid,
    run_transfer_evaluation,
    source_means_for,
)
from core.services.meta_stats import run_meta_analysis
from core.services.pipelines import Pipeline, PipelineRegistry
from core.utils.errors import InfeasibleSplitError, NumericalError, ValidationError
from tests.factories import DatasetFactory, replace_subject

pytestmark = pytest.mark.integration

SMALL = EvalConfig(n_train=(2, 4), lambdas=(0.0, 0.5, 1.0), repetitions=3, seed=11)


@pytest.fixture(scope="module")
def small_scores(small_dataset):
    return run_transfer_evaluation(small_dataset, SMALL)


@pytest.fixture(scope="module")
def default_scores(default_dataset):
    config = EvalConfig(n_train=(4, 8, 16), lambdas=(0.7,), repetitions=10, seed=0)
    return run_transfer_evaluation(default_dataset, config)


def test_row_count_covers_every_cell(small_dataset, small_scores):
    subjects = len(small_dataset.subjects)
    # mdwm once per lambda, target-only fitted once and emitted for every lambda
    assert len(small_scores) == subjects * 2 * 3 * (3 + 3)
    frame = small_scores.frame
    assert set(frame["pipeline"]) == {"mdwm", "mdm-target-only"}
    assert frame["balanced_accuracy"].between(0, 1).all()
    assert (frame["train_seconds"] == 0).all() and (frame["test_seconds"] == 0).all()


def test_lambda_zero_matches_target_only(small_scores):
    frame = small_scores.frame
    key = ["subject", "n_train", "repetition"]
    mdwm = frame[(frame["pipeline"] == "mdwm") & (frame["lambda"] == 0.0)].set_index(key)
    target = frame[(frame["pipeline"] == "mdm-target-only") & (frame["lambda"] == 0.0)].set_index(key)
    np.testing.assert_array_equal(
        mdwm["balanced_accuracy"].sort_index().to_numpy(), target["balanced_accuracy"].sort_index().to_numpy()
    )


def test_target_only_scores_do_not_depend_on_lambda(small_scores):
    frame = small_scores.frame
    target = frame[frame["pipeline"] == "mdm-target-only"]
    spread = target.groupby(["subject", "n_train", "repetition"])["balanced_accuracy"].nunique()
    assert (spread == 1).all()


def test_uncached_source_means_give_identical_scores(small_dataset, small_scores):
    uncached = run_transfer_evaluation(small_dataset, SMALL.model_copy(update={"cache_source_means": False}))
    assert uncached.frame.equals(small_scores.frame)


@pytest.mark.parametrize("jobs", [2, 8])
def test_worker_count_does_not_change_results(small_dataset, small_scores, jobs):
    parallel = run_transfer_evaluation(small_dataset, SMALL.model_copy(update={"jobs": jobs}))
    assert parallel.frame.equals(small_scores.frame)


def test_timings_are_recorded_on_request(small_dataset):
    config = EvalConfig(n_train=(2,), lambdas=(0.5,), repetitions=1, record_timings=True)
    frame = run_transfer_evaluation(small_dataset, config).frame
    assert (frame["train_seconds"] > 0).all()
    assert (frame["test_seconds"] > 0).all()


@pytest.mark.parametrize(
    "paradigm",
    [ParadigmConfig(), ParadigmConfig(kind="erp_prototype", prototype_label="class_01")],
    ids=["plain", "erp-prototype"],
)
def test_target_trials_never_reach_source_means(small_dataset, paradigm):
    config = EvalConfig(n_train=(2,), paradigm=paradigm)
    target = small_dataset.subjects[0]
    poisoned = SubjectRecord(
        subject_id=target.subject_id,
        trials=tuple(t.with_signal(t.signal * 1e3) for t in target.trials),
    )
    before = source_means_for(small_dataset, target.subject_id, config)
    after = source_means_for(replace_subject(small_dataset, poisoned), target.subject_id, config)
    for label in before.labels:
        assert before[label].values.tobytes() == after[label].values.tobytes()


def test_infeasible_n_lists_capacities(small_dataset):
    # 2 classes x (6 - 1) trials
    check_feasible(small_dataset, [2, 10])
    with pytest.raises(InfeasibleSplitError, match="S01: 10"):
        check_feasible(small_dataset, [11])
    with pytest.raises(InfeasibleSplitError):
        run_transfer_evaluation(small_dataset, EvalConfig(n_train=(1,)))


def test_default_grid_is_clipped_with_warning(small_dataset, caplog):
    with caplog.at_level(logging.WARNING):
        assert feasible_n_grid(small_dataset, (5, 30, 55)) == (5,)
    assert "dropping infeasible n values [30, 55]" in caplog.text


def test_failures_carry_their_coordinates(small_dataset, monkeypatch):
    def explode(target, source_means, lam, feature_key):
        raise NumericalError("boom")

    monkeypatch.setitem(
        PipelineRegistry._pipelines, "exploding", Pipeline(name="exploding", uses_lambda=True, fit_fn=explode)
    )
    config = EvalConfig(n_train=(2,), lambdas=(0.5,), repetitions=1, pipelines=("exploding",))
    with pytest.raises(NumericalError) as info:
        run_transfer_evaluation(small_dataset, config)
    notes = " ".join(info.value.__notes__)
    assert "subject=S01" in notes
    assert "pipeline=exploding" in notes
    assert "n=2" in notes


def test_transfer_beats_target_only_calibration(default_scores):
    frame = default_scores.frame
    cell = frame[frame["n_train"] == 8]
    mdwm = cell[cell["pipeline"] == "mdwm"]["balanced_accuracy"].to_numpy()
    target = cell[cell["pipeline"] == "mdm-target-only"]["balanced_accuracy"].to_numpy()
    # rows are sorted by subject then repetition within each pipeline
    assert mdwm.size == target.size == 8 * 10
    assert 0.55 <= float(np.mean(target)) <= 0.75
    assert float(np.mean(mdwm - target)) >= 0.05

    result = run_meta_analysis([default_scores], "mdwm", "mdm-target-only", 8, 0.7)
    assert result.combined_p_value < 0.05
    assert result.datasets[0].smd > 0


def test_accuracy_grows_with_calibration_size(default_scores):
    means = default_scores.frame.groupby(["pipeline", "n_train"])["balanced_accuracy"].mean()
    for pipeline in ("mdwm", "mdm-target-only"):
        curve = means.loc[pipeline].sort_index().to_numpy()
        assert np.all(np.diff(curve) >= -0.02), (pipeline, curve)


def test_no_class_structure_scores_at_chance():
    ds = DatasetFactory(
        {"classes": 4, "subjects": 4, "trials_per_class": 20, "class_separation": 0.0, "subject_variability": 0.0}
    ).build()
    frame = run_transfer_evaluation(ds, EvalConfig(n_train=(8,), lambdas=(0.5,), repetitions=5)).frame
    for pipeline, scores in frame.groupby("pipeline")["balanced_accuracy"]:
        assert abs(scores.mean() - 0.25) <= 0.1, pipeline


def test_source_weights_reach_source_means(small_dataset):
    ids = [s.subject_id for s in small_dataset.subjects]
    target, dropped = ids[0], ids[1]
    uniform = source_means_for(small_dataset, target, EvalConfig(n_train=(2,)))
    ramp = {sid: float(i + 1) for i, sid in enumerate(ids)}
    skewed = source_means_for(small_dataset, target, EvalConfig(n_train=(2,), source_weights=ramp))
    assert any(not np.allclose(uniform[k].values, skewed[k].values) for k in uniform.labels)

    mask = {sid: float(sid != dropped) for sid in ids}
    zeroed = source_means_for(small_dataset, target, EvalConfig(n_train=(2,), source_weights=mask))
    remaining = small_dataset.model_copy(
        update={"subjects": tuple(s for s in small_dataset.subjects if s.subject_id != dropped)}
    )
    without = source_means_for(remaining, target, EvalConfig(n_train=(2,)))
    for k in uniform.labels:
        np.testing.assert_allclose(zeroed[k].values, without[k].values, rtol=1e-12)


def test_source_weights_must_cover_the_pool(small_dataset):
    config = EvalConfig(n_train=(2,), lambdas=(0.5,), repetitions=1, source_weights={"S01": 1.0})
    with pytest.raises(ValidationError, match="S02"):
        run_transfer_evaluation(small_dataset, config)
