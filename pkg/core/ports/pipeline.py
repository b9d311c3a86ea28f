from __future__ import annotations

from collections.abc import Sequence
from typing import Protocol

from core.domain.classes import ClassMeans
from core.domain.spd import SpdMatrix


class TransferPipelinePort(Protocol):
    """Builds class means for one target subject from its calibration and the source pool."""

    name: str
    uses_lambda: bool

    def fit(
        self,
        target: Sequence[tuple[SpdMatrix, str]],
        source_means: ClassMeans,
        lam: float,
        *,
        feature_key: str | None = None,
    ) -> ClassMeans: ...
