"""
Covariance features from raw multichannel trials.

Paradigm-specific augmentations let one minimum-distance classifier serve
motor-imagery (plain), ERP/P300 (prototype stacking) and SSVEP (filter bank)
recordings.
"""

from __future__ import annotations

from collections.abc import Sequence
import logging
from typing import Literal

import numpy as np
from sklearn.covariance import ledoit_wolf_shrinkage

from core.domain.spd import FloatArray, SpdMatrix
from core.domain.trial import ParadigmConfig, Trial
from core.utils.constants import (
    AUTO_SHRINKAGE_CEIL,
    AUTO_SHRINKAGE_FLOOR,
    DEFAULT_SHRINKAGE,
    FILTER_TRANSITION_HZ,
)
from core.utils.errors import NotSpdError, RegularizationNeededError, ValidationError

logger = logging.getLogger(__name__)

Regularization = float | Literal["auto"]


def _centered(signal: FloatArray, center: bool) -> FloatArray:
    return signal - signal.mean(axis=1, keepdims=True) if center else signal


def estimate_shrinkage(trial: Trial, *, center: bool = True) -> float:
    """Ledoit-Wolf shrinkage intensity toward the scaled identity, clipped to keep full rank."""
    x = _centered(trial.signal, center)
    if trial.channels == 1:
        return AUTO_SHRINKAGE_FLOOR
    gamma = float(ledoit_wolf_shrinkage(x.T, assume_centered=True))
    return float(np.clip(gamma, AUTO_SHRINKAGE_FLOOR, AUTO_SHRINKAGE_CEIL))


def sample_covariance(
    trial: Trial, regularization: Regularization = DEFAULT_SHRINKAGE, *, center: bool = True
) -> SpdMatrix:
    """(1 - g) * (X X^T / T) + g * (trace / C) * I for the C x T signal X.

    Channels are mean-centered first unless ``center`` is False. ``regularization``
    may be ``"auto"`` for a Ledoit-Wolf estimate of g.
    """
    if trial.samples < 2:
        raise ValidationError(f"need at least 2 samples per trial, got {trial.samples}")
    gamma = estimate_shrinkage(trial, center=center) if regularization == "auto" else float(regularization)
    if not 0.0 <= gamma < 1.0:
        raise ValidationError(f"regularization must lie in [0, 1), got {gamma}")
    x = _centered(trial.signal, center)
    cov = x @ x.T / trial.samples
    if gamma > 0.0:
        mu = np.trace(cov) / trial.channels
        cov = (1.0 - gamma) * cov + gamma * mu * np.eye(trial.channels)
    try:
        return SpdMatrix(cov)
    except NotSpdError as e:
        raise RegularizationNeededError(
            f"covariance of a {trial.channels}x{trial.samples} trial is singular at "
            f"regularization {gamma}; increase the shrinkage"
        ) from e


def class_prototype(trials: Sequence[Trial], label: str) -> FloatArray:
    """Arithmetic mean signal of the trials carrying ``label``."""
    matching = [t.signal for t in trials if t.label == label]
    if not matching:
        raise ValidationError(f"no trials with label {label!r} to build a prototype")
    shapes = {s.shape for s in matching}
    if len(shapes) != 1:
        raise ValidationError(f"prototype trials have mixed shapes {sorted(shapes)}")
    return np.mean(np.stack(matching), axis=0)


def erp_augment(trial: Trial, prototype: FloatArray) -> Trial:
    """Stack the prototype rows above the trial rows (2C x T)."""
    prototype = np.asarray(prototype, dtype=np.float64)
    if prototype.shape != trial.signal.shape:
        raise ValidationError(
            f"prototype shape {prototype.shape} does not match trial shape {trial.signal.shape}"
        )
    return trial.with_signal(np.vstack([prototype, trial.signal]))


def _band_mask(freqs: FloatArray, low: float, high: float, width: float) -> FloatArray:
    mask = ((freqs >= low) & (freqs <= high)).astype(np.float64)
    below = (freqs > low - width) & (freqs < low)
    mask[below] = 0.5 * (1.0 + np.cos(np.pi * (low - freqs[below]) / width))
    above = (freqs > high) & (freqs < high + width)
    mask[above] = 0.5 * (1.0 + np.cos(np.pi * (freqs[above] - high) / width))
    return mask


def filter_bank_augment(trial: Trial, config: ParadigmConfig) -> Trial:
    """Stack zero-phase band-passed copies of the signal, one per band (F*C x T).

    Filtering masks the real FFT with a raised-cosine edge of 1 Hz on each side
    of the pass band.
    """
    if config.kind != "filter_bank" or config.sampling_rate is None:
        raise ValidationError("filter_bank_augment requires a filter_bank paradigm config")
    spectrum = np.fft.rfft(trial.signal, axis=1)
    freqs = np.fft.rfftfreq(trial.samples, d=1.0 / config.sampling_rate)
    copies = [
        np.fft.irfft(spectrum * _band_mask(freqs, low, high, FILTER_TRANSITION_HZ), n=trial.samples, axis=1)
        for low, high in config.bands
    ]
    return trial.with_signal(np.vstack(copies))


class CovarianceFeatures:
    """Feature extractor: paradigm augmentation followed by shrunk sample covariance.

    Extractors with equal configuration produce interchangeable features and
    share the same ``key``. For ``erp_prototype`` paradigms, ``fit`` must see the
    trials the prototype is learned from before ``transform`` is called.
    """

    def __init__(
        self,
        paradigm: ParadigmConfig | None = None,
        regularization: Regularization = DEFAULT_SHRINKAGE,
        *,
        center: bool = True,
    ):
        self.paradigm = paradigm or ParadigmConfig()
        self.regularization = regularization
        self.center = center
        self.prototype: FloatArray | None = None

    @property
    def key(self) -> str:
        return f"{self.paradigm.fingerprint()}|reg={self.regularization}|center={self.center}"

    def fit(self, trials: Sequence[Trial]) -> CovarianceFeatures:
        if self.paradigm.kind == "erp_prototype":
            assert self.paradigm.prototype_label is not None
            self.prototype = class_prototype(trials, self.paradigm.prototype_label)
            logger.debug(f"learned ERP prototype from {len(trials)} trials")
        return self

    def augment(self, trial: Trial) -> Trial:
        kind = self.paradigm.kind
        if kind == "erp_prototype":
            if self.prototype is None:
                raise ValidationError("erp_prototype features used before fit()")
            return erp_augment(trial, self.prototype)
        if kind == "filter_bank":
            return filter_bank_augment(trial, self.paradigm)
        return trial

    def transform_one(self, trial: Trial) -> SpdMatrix:
        return sample_covariance(self.augment(trial), self.regularization, center=self.center)

    def transform(self, trials: Sequence[Trial]) -> list[SpdMatrix]:
        return [self.transform_one(t) for t in trials]

    def labeled(self, trials: Sequence[Trial]) -> list[tuple[SpdMatrix, str]]:
        return [(self.transform_one(t), t.label) for t in trials]
