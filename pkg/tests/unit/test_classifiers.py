from __future__ import annotations

import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from core.domain.classes import ClassMeans, TransferParams
from core.domain.dataset import SubjectRecord
from core.domain.spd import SpdMatrix
from core.domain.trial import Trial
from core.services.classifiers import (
    combine_mdwm,
    fit_mdm,
    fit_mdwm,
    fit_source_means,
    predict_many,
    predict_mdm,
)
from core.services.features import CovarianceFeatures
from core.services.spd_manifold import riemann_distance
from core.utils.errors import (
    DimensionMismatchError,
    FeatureConfigMismatchError,
    LabelSetMismatchError,
    ValidationError,
)
from tests.factories import congruence, random_congruence, random_spd_set

pytestmark = pytest.mark.unit


def _scalar(v: float) -> SpdMatrix:
    return SpdMatrix([[v]])


def _means(**values: float) -> ClassMeans:
    return ClassMeans(means={k: _scalar(v) for k, v in values.items()})


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def test_fit_mdm_one_sample_per_class(rng):
    a, b = random_spd_set(rng, 2, 3)
    means = fit_mdm([(a, "x"), (b, "y")])
    assert means.labels == ("x", "y")
    assert_allclose(means["x"].values, a.values)
    assert_allclose(means["y"].values, b.values)


def test_fit_mdm_scalar_geometric_mean():
    means = fit_mdm([(_scalar(1.0), "a"), (_scalar(4.0), "a"), (_scalar(9.0), "b")])
    assert_allclose(means["a"].values, [[2.0]], rtol=1e-9)


def test_fit_mdm_is_congruence_equivariant(rng):
    feats = [(m, "a") for m in random_spd_set(rng, 5, 3, 0.3)] + [
        (m, "b") for m in random_spd_set(rng, 5, 3, 0.3)
    ]
    g = random_congruence(rng, 3)
    moved = fit_mdm([(congruence(g, m), label) for m, label in feats])
    base = fit_mdm(feats)
    for label in ("a", "b"):
        assert _rel(moved[label].values, congruence(g, base[label]).values) <= 1e-7


def test_fit_mdm_needs_two_classes(rng):
    with pytest.raises(LabelSetMismatchError):
        fit_mdm([(m, "a") for m in random_spd_set(rng, 3, 2)])


def test_predict_exact_mean_wins(rng):
    means = fit_mdm([(m, label) for m, label in zip(random_spd_set(rng, 3, 4), "abc", strict=True)])
    label, distances = predict_mdm(means, means["b"])
    assert label == "b"
    assert distances["b"] <= 1e-10


def test_predict_scalar_distances():
    label, distances = predict_mdm(_means(a=1.0, b=9.0), _scalar(2.0))
    assert label == "a"
    assert distances["a"] == pytest.approx(math.log(2.0), abs=1e-4)
    assert distances["b"] == pytest.approx(abs(math.log(2.0 / 9.0)), abs=1e-4)


def test_predict_tie_goes_to_first_label():
    label, _ = predict_mdm(_means(b=4.0, a=1.0), _scalar(2.0))
    assert label == "a"


def test_predict_invariant_under_joint_congruence_and_scaling(rng):
    means = fit_mdm([(m, label) for m, label in zip(random_spd_set(rng, 3, 4), "abc", strict=True)])
    queries = random_spd_set(rng, 20, 4)
    g = random_congruence(rng, 4)
    moved = ClassMeans(means={k: congruence(g, m) for k, m in means.means.items()})
    scaled = ClassMeans(means={k: SpdMatrix(3.0 * m.values) for k, m in means.means.items()})
    base = predict_many(means, queries)
    assert predict_many(moved, [congruence(g, q) for q in queries]) == base
    assert predict_many(scaled, [SpdMatrix(3.0 * q.values) for q in queries]) == base


def test_predict_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        predict_mdm(_means(a=1.0, b=2.0), SpdMatrix.identity(2))


def test_combine_endpoints_and_midpoint():
    target, source = _means(a=1.0, b=2.0), _means(a=4.0, b=8.0)
    assert combine_mdwm(target, source, 0.0)["a"] is target["a"]
    assert combine_mdwm(target, source, 1.0)["b"] is source["b"]
    assert_allclose(combine_mdwm(target, source, 0.5)["a"].values, [[2.0]], rtol=1e-12)


def test_combine_interpolates_along_geodesic(rng):
    target = ClassMeans(means=dict(zip("ab", random_spd_set(rng, 2, 4), strict=True)))
    source = ClassMeans(means=dict(zip("ab", random_spd_set(rng, 2, 4), strict=True)))
    previous = {k: math.inf for k in "ab"}
    for lam in np.linspace(0.0, 1.0, 11):
        combined = combine_mdwm(target, source, float(lam))
        for k in "ab":
            d_total = riemann_distance(target[k], source[k])
            assert riemann_distance(target[k], combined[k]) == pytest.approx(lam * d_total, rel=1e-8, abs=1e-12)
            to_source = riemann_distance(combined[k], source[k])
            assert to_source <= previous[k] + 1e-10
            previous[k] = to_source


def test_combine_rejects_incompatible_means():
    with pytest.raises(LabelSetMismatchError):
        combine_mdwm(_means(a=1.0, b=2.0), _means(a=1.0, c=2.0), 0.5)
    two_dim = ClassMeans(means={"a": SpdMatrix.identity(2), "b": SpdMatrix.identity(2)})
    with pytest.raises(DimensionMismatchError):
        combine_mdwm(_means(a=1.0, b=2.0), two_dim, 0.5)
    keyed = ClassMeans(means=_means(a=1.0, b=2.0).means, feature_key="x")
    other = ClassMeans(means=_means(a=1.0, b=2.0).means, feature_key="y")
    with pytest.raises(FeatureConfigMismatchError):
        combine_mdwm(keyed, other, 0.5)


def test_fit_mdwm_endpoints(rng):
    feats = [(m, label) for m, label in zip(random_spd_set(rng, 4, 3), "abab", strict=True)]
    source = ClassMeans(means=dict(zip("ab", random_spd_set(rng, 2, 3), strict=True)))
    at_zero = fit_mdwm(feats, source, TransferParams(lam=0.0))
    direct = fit_mdm(feats)
    for k in "ab":
        assert _rel(at_zero[k].values, direct[k].values) <= 1e-12
    assert fit_mdwm([], source, TransferParams(lam=1.0)) is source


def test_fit_mdwm_requires_every_class_below_one(rng):
    source = ClassMeans(means=dict(zip("ab", random_spd_set(rng, 2, 3), strict=True)))
    with pytest.raises(LabelSetMismatchError):
        fit_mdwm([(m, "a") for m in random_spd_set(rng, 2, 3)], source, TransferParams(lam=0.5))


def test_transfer_params_accept_lambda_alias_and_validate():
    assert TransferParams.model_validate({"lambda": 0.3}).lam == 0.3
    with pytest.raises(ValidationError):
        TransferParams(lam=1.2)
    with pytest.raises(ValidationError):
        TransferParams(lam=0.5, source_subject_weights=(0.5, 0.6))


# --- source means ---


def _subject(subject_id: str, values: dict[str, list[float]]) -> SubjectRecord:
    """Trials whose uncentered 1 x 1 covariance equals each listed value."""
    trials = []
    for label, covs in values.items():
        for v in covs:
            trials.append(Trial(signal=[[math.sqrt(v), -math.sqrt(v)]], label=label))
    return SubjectRecord(subject_id=subject_id, trials=tuple(trials))


_SCALAR_FEATURES = CovarianceFeatures(regularization=0.0, center=False)


def test_source_means_weight_subjects_not_trials():
    s1 = _subject("s1", {"a": [1.0, 1.0, 1.0], "b": [2.0]})
    s2 = _subject("s2", {"a": [4.0], "b": [2.0]})
    means = fit_source_means([s1, s2], features=_SCALAR_FEATURES)
    assert_allclose(means["a"].values, [[2.0]], rtol=1e-9)


def test_source_means_single_subject_matches_mdm():
    s1 = _subject("s1", {"a": [1.0, 4.0], "b": [2.0, 8.0]})
    pooled = fit_source_means([s1], features=_SCALAR_FEATURES)
    direct = fit_mdm(_SCALAR_FEATURES.labeled(s1.trials))
    for k in "ab":
        assert_allclose(pooled[k].values, direct[k].values, rtol=1e-12)


def test_source_means_zero_weight_drops_a_subject():
    s1 = _subject("s1", {"a": [1.0, 4.0], "b": [2.0]})
    s2 = _subject("s2", {"a": [100.0], "b": [50.0]})
    pooled = fit_source_means([s1, s2], weights=[1.0, 0.0], features=_SCALAR_FEATURES)
    alone = fit_source_means([s1], features=_SCALAR_FEATURES)
    assert_allclose(pooled["a"].values, alone["a"].values, rtol=1e-12)


def test_source_means_errors():
    with pytest.raises(ValidationError):
        fit_source_means([])
    s1 = _subject("s1", {"a": [1.0], "b": [2.0]})
    s2 = _subject("s2", {"a": [1.0]})
    with pytest.raises(LabelSetMismatchError):
        fit_source_means([s1, s2], features=_SCALAR_FEATURES)
    with pytest.raises(ValidationError):
        fit_source_means([s1], weights=[0.5, 0.5], features=_SCALAR_FEATURES)
