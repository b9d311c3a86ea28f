from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import Field, field_validator, model_validator

from core.domain.base_model import BaseModel
from core.domain.spd import FloatArray
from core.utils.errors import ValidationError


class Trial(BaseModel):
    """One multichannel signal segment (channels x samples) with its class label."""

    signal: np.ndarray
    label: str

    @field_validator("signal", mode="before")
    @classmethod
    def _as_signal(cls, value: object) -> FloatArray:
        arr = np.array(value, dtype=np.float64)
        if arr.ndim != 2 or 0 in arr.shape:
            raise ValidationError(f"trial signal must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("trial signal has non-finite samples")
        arr.setflags(write=False)
        return arr

    @property
    def channels(self) -> int:
        return int(self.signal.shape[0])

    @property
    def samples(self) -> int:
        return int(self.signal.shape[1])

    def with_signal(self, signal: FloatArray) -> Trial:
        return Trial(signal=signal, label=self.label)


ParadigmKind = Literal["plain", "erp_prototype", "filter_bank"]


class ParadigmConfig(BaseModel):
    """How raw trials are augmented before covariance estimation.

    ``plain`` uses the signal as is; ``erp_prototype`` stacks the mean waveform of
    ``prototype_label`` above each trial (P300-style data); ``filter_bank`` stacks
    band-passed copies of the signal, one per band (SSVEP-style data).
    """

    kind: ParadigmKind = "plain"
    prototype_label: str | None = None
    bands: tuple[tuple[float, float], ...] = Field(default_factory=tuple)
    sampling_rate: float | None = None

    @model_validator(mode="after")
    def _check_kind_fields(self) -> ParadigmConfig:
        if self.kind == "erp_prototype" and not self.prototype_label:
            raise ValidationError("erp_prototype paradigm requires a prototype_label")
        if self.kind == "filter_bank":
            if not self.bands:
                raise ValidationError("filter_bank paradigm requires at least one band")
            if self.sampling_rate is None or self.sampling_rate <= 0:
                raise ValidationError("filter_bank paradigm requires a positive sampling_rate")
            nyquist = self.sampling_rate / 2.0
            for low, high in self.bands:
                if not 0.0 <= low < high < nyquist:
                    raise ValidationError(
                        f"invalid band ({low}, {high}) Hz: need 0 <= low < high < {nyquist}"
                    )
        return self

    def fingerprint(self) -> str:
        """Stable text identity used to reject mixing features from different recipes."""
        return self.model_dump_json()
