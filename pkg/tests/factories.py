from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from core.domain.dataset import Dataset, SubjectRecord, SynthConfig
from core.domain.spd import SpdMatrix
from core.domain.trial import Trial
from core.services.spd_manifold import spd_exp
from core.services.synthetic import generate_synthetic, symmetric_gaussian


def random_spd(rng: np.random.Generator, dim: int, scale: float = 0.5) -> SpdMatrix:
    return spd_exp(symmetric_gaussian(rng, dim, scale))


def random_spd_set(rng: np.random.Generator, count: int, dim: int, scale: float = 0.5) -> list[SpdMatrix]:
    return [random_spd(rng, dim, scale) for _ in range(count)]


def random_congruence(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Invertible matrix with condition number at most 4."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * rng.uniform(0.5, 2.0, size=dim)


@dataclass
class TrialFactory:
    channels: int = 4
    samples: int = 64
    seed: int = 0

    def build(self, label: str = "a", count: int = 1) -> list[Trial]:
        rng = np.random.default_rng(self.seed)
        return [
            Trial(signal=rng.standard_normal((self.channels, self.samples)), label=label)
            for _ in range(count)
        ]


@dataclass
class DatasetFactory:
    """Small synthetic dataset; overrides go to SynthConfig."""

    overrides: dict = field(default_factory=dict)

    def config(self) -> SynthConfig:
        params = {
            "seed": 3,
            "subjects": 4,
            "classes": 2,
            "channels": 4,
            "samples": 64,
            "trials_per_class": 6,
            "class_separation": 0.5,
            "subject_variability": 0.05,
            "trial_noise": 0.05,
        }
        params.update(self.overrides)
        return SynthConfig(**params)

    def build(self) -> Dataset:
        return generate_synthetic(self.config())


def replace_subject(ds: Dataset, subject: SubjectRecord) -> Dataset:
    subjects = tuple(subject if s.subject_id == subject.subject_id else s for s in ds.subjects)
    return ds.model_copy(update={"subjects": subjects})


def congruence(g: np.ndarray, a: SpdMatrix) -> SpdMatrix:
    values = g @ a.values @ g.T
    return SpdMatrix((values + values.T) / 2.0)
