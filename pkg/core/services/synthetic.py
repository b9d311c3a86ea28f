"""
Seeded synthetic multi-subject covariance data.

Class centres are drawn once, moved per subject along the manifold, and every
trial is a Gaussian sample block whose covariance is a further perturbation of
its subject/class centre. Streams are addressed through ``core.utils.seeding``
so any subject or trial can be regenerated on its own.
"""

from __future__ import annotations

import logging

import numpy as np

from core.domain.dataset import Dataset, SubjectRecord, SynthConfig
from core.domain.spd import FloatArray, SpdMatrix, symmetrize
from core.domain.trial import Trial
from core.services.spd_manifold import spd_exp, spd_power
from core.utils.seeding import rng_for

logger = logging.getLogger(__name__)


def symmetric_gaussian(rng: np.random.Generator, dim: int, scale: float) -> FloatArray:
    """scale * (Z + Z^T) / sqrt(2): off-diagonal variance scale^2, diagonal 2 scale^2."""
    z = rng.standard_normal((dim, dim))
    return scale * (z + z.T) / np.sqrt(2.0)


def _congruence(center: SpdMatrix, perturbation: SpdMatrix) -> SpdMatrix:
    root = spd_power(center, 0.5).values
    return SpdMatrix(symmetrize(root @ perturbation.values @ root))


def class_centers(config: SynthConfig) -> list[SpdMatrix]:
    rng = rng_for(config.seed, 0)
    return [
        spd_exp(symmetric_gaussian(rng, config.channels, config.class_separation))
        for _ in range(config.classes)
    ]


def subject_centers(config: SynthConfig, subject_index: int, centers: list[SpdMatrix]) -> list[SpdMatrix]:
    rng = rng_for(config.seed, 1, subject_index)
    return [
        _congruence(c, spd_exp(symmetric_gaussian(rng, config.channels, config.subject_variability)))
        for c in centers
    ]


def _trial_signal(config: SynthConfig, center: SpdMatrix, key: tuple[int, int, int]) -> FloatArray:
    rng = rng_for(config.seed, 2, *key)
    cov = _congruence(center, spd_exp(symmetric_gaussian(rng, config.channels, config.trial_noise)))
    mixing = spd_power(cov, 0.5).values
    return mixing @ rng.standard_normal((config.channels, config.samples))


def generate_subject(config: SynthConfig, subject_index: int, centers: list[SpdMatrix]) -> SubjectRecord:
    labels = config.class_labels()
    per_class = subject_centers(config, subject_index, centers)
    trials = [
        Trial(signal=_trial_signal(config, per_class[k], (subject_index, k, j)), label=labels[k])
        for j in range(config.trials_per_class)
        for k in range(config.classes)
    ]
    return SubjectRecord(subject_id=config.subject_ids()[subject_index], trials=tuple(trials))


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Build a balanced dataset deterministically from ``config.seed``."""
    centers = class_centers(config)
    subjects = tuple(generate_subject(config, s, centers) for s in range(config.subjects))
    logger.info(
        f"generated {config.subjects} subjects x {config.classes} classes x "
        f"{config.trials_per_class} trials (seed {config.seed})"
    )
    return Dataset(
        name=f"synthetic-seed{config.seed}",
        paradigm="synthetic",
        sampling_rate=config.sampling_rate,
        labels=config.class_labels(),
        subjects=subjects,
    )
