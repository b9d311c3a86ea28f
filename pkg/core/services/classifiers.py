"""
Minimum distance to mean (MDM) and minimum distance to weighted mean (MDWM).

MDWM combines target-subject class means S_k with source-pool class means D_k
along the geodesic, A_k = S_k #_lambda D_k: lambda = 0 keeps only the target
calibration, lambda = 1 is the calibration-free source model.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Sequence
import logging

import numpy as np

from core.domain.classes import ClassMeans, TransferParams, check_simplex
from core.domain.dataset import SubjectRecord
from core.domain.spd import SpdMatrix
from core.services.features import CovarianceFeatures
from core.services.spd_manifold import frechet_mean, geodesic, riemann_distance
from core.utils.errors import (
    DimensionMismatchError,
    FeatureConfigMismatchError,
    LabelSetMismatchError,
    ValidationError,
)

logger = logging.getLogger(__name__)

LabeledFeature = tuple[SpdMatrix, str]


def fit_mdm(features: Sequence[LabeledFeature], *, feature_key: str | None = None) -> ClassMeans:
    """Per-class uniform-weight Frechet mean."""
    by_class: dict[str, list[SpdMatrix]] = defaultdict(list)
    for cov, label in features:
        by_class[label].append(cov)
    if len(by_class) < 2:
        raise LabelSetMismatchError(
            f"MDM needs samples from at least 2 classes, got {sorted(by_class)}"
        )
    return ClassMeans(
        means={label: frechet_mean(covs) for label, covs in sorted(by_class.items())},
        feature_key=feature_key,
    )


def predict_mdm(means: ClassMeans, query: SpdMatrix) -> tuple[str, dict[str, float]]:
    """Nearest class mean; ties go to the first label in canonical order."""
    if query.dim != means.dim:
        raise DimensionMismatchError(f"query has dimension {query.dim}, model expects {means.dim}")
    distances = {label: riemann_distance(m, query) for label, m in means.means.items()}
    labels = list(distances)
    best = int(np.argmin([distances[label] for label in labels]))
    return labels[best], distances


def predict_many(means: ClassMeans, queries: Sequence[SpdMatrix]) -> list[str]:
    return [predict_mdm(means, q)[0] for q in queries]


def _check_compatible(target: ClassMeans, source: ClassMeans) -> None:
    if target.labels != source.labels:
        raise LabelSetMismatchError(
            f"target classes {target.labels} differ from source classes {source.labels}"
        )
    if target.dim != source.dim:
        raise DimensionMismatchError(f"target dimension {target.dim} vs source {source.dim}")
    if target.feature_key and source.feature_key and target.feature_key != source.feature_key:
        raise FeatureConfigMismatchError(
            "target and source means were fitted on different feature configurations"
        )


def combine_mdwm(target: ClassMeans, source: ClassMeans, lam: float) -> ClassMeans:
    """A_k = geodesic(S_k, D_k, lam) for every class."""
    _check_compatible(target, source)
    return ClassMeans(
        means={k: geodesic(target[k], source[k], lam) for k in target.labels},
        feature_key=target.feature_key or source.feature_key,
    )


def fit_source_means(
    source_subjects: Sequence[SubjectRecord],
    weights: Sequence[float] | None = None,
    features: CovarianceFeatures | None = None,
) -> ClassMeans:
    """Pooled, subject-weighted class means of the source pool.

    Each trial carries its subject's weight divided by that subject's trial count
    for the class, so subjects (not trials) are weighted. ``weights`` defaults to
    uniform over subjects.
    """
    if not source_subjects:
        raise ValidationError("source pool is empty")
    features = features or CovarianceFeatures()
    if weights is None:
        w = np.full(len(source_subjects), 1.0 / len(source_subjects))
    else:
        w = check_simplex(list(weights), "source subject weights")
        if w.size != len(source_subjects):
            raise ValidationError(f"{w.size} weights for {len(source_subjects)} source subjects")

    labels = sorted({label for s in source_subjects for label in s.labels})
    pooled: dict[str, list[SpdMatrix]] = {label: [] for label in labels}
    pooled_weights: dict[str, list[float]] = {label: [] for label in labels}
    for subject, subject_weight in zip(source_subjects, w, strict=True):
        counts = subject.class_counts()
        missing = [label for label in labels if label not in counts]
        if missing:
            raise LabelSetMismatchError(
                f"source subject {subject.subject_id!r} has no trials of class(es) {missing}"
            )
        if subject_weight == 0.0:
            continue
        for trial in subject.trials:
            pooled[trial.label].append(features.transform_one(trial))
            pooled_weights[trial.label].append(subject_weight / counts[trial.label])

    means = {}
    for label in labels:
        lw = np.asarray(pooled_weights[label])
        means[label] = frechet_mean(pooled[label], lw / lw.sum())
    logger.debug(f"source means fitted from {len(source_subjects)} subjects, classes {labels}")
    return ClassMeans(means=means, feature_key=features.key)


def fit_mdwm(
    target_features: Sequence[LabeledFeature],
    source_means: ClassMeans,
    params: TransferParams,
    *,
    feature_key: str | None = None,
) -> ClassMeans:
    """Target MDM means moved toward the source means by ``params.lam``.

    At lambda = 1 the target set may be empty and the source means are returned.
    """
    if params.lam == 1.0:
        return source_means
    present = {label for _, label in target_features}
    missing = [label for label in source_means.labels if label not in present]
    if missing:
        raise LabelSetMismatchError(
            f"target calibration lacks class(es) {missing}; required when lambda < 1"
        )
    target = fit_mdm(target_features, feature_key=feature_key)
    return combine_mdwm(target, source_means, params.lam)
