"""
Registry of named evaluation pipelines.

New pipelines register with a decorator and become selectable by name from
the evaluation config and the CLI without touching the engine.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

from core.domain.classes import ClassMeans, TransferParams
from core.domain.spd import SpdMatrix
from core.ports.pipeline import TransferPipelinePort
from core.services.classifiers import fit_mdm, fit_mdwm
from core.utils.constants import PIPELINE_MDWM, PIPELINE_SOURCE_ONLY, PIPELINE_TARGET_ONLY
from core.utils.errors import ValidationError

FitFn = Callable[[Sequence[tuple[SpdMatrix, str]], ClassMeans, float, str | None], ClassMeans]


@dataclass(frozen=True)
class Pipeline:
    name: str
    uses_lambda: bool
    fit_fn: FitFn

    def fit(
        self,
        target: Sequence[tuple[SpdMatrix, str]],
        source_means: ClassMeans,
        lam: float,
        *,
        feature_key: str | None = None,
    ) -> ClassMeans:
        return self.fit_fn(target, source_means, lam, feature_key)


class PipelineRegistry:
    _pipelines: dict[str, Pipeline] = {}

    @classmethod
    def register(cls, name: str, *, uses_lambda: bool) -> Callable[[FitFn], FitFn]:
        def decorator(fit_fn: FitFn) -> FitFn:
            cls._pipelines[name] = Pipeline(name=name, uses_lambda=uses_lambda, fit_fn=fit_fn)
            return fit_fn

        return decorator

    @classmethod
    def get(cls, name: str) -> TransferPipelinePort:
        if name not in cls._pipelines:
            raise ValidationError(f"unknown pipeline {name!r}; available: {cls.list_registered()}")
        return cls._pipelines[name]

    @classmethod
    def resolve(cls, names: Sequence[str]) -> list[TransferPipelinePort]:
        return [cls.get(n) for n in names]

    @classmethod
    def list_registered(cls) -> list[str]:
        return sorted(cls._pipelines)


@PipelineRegistry.register(PIPELINE_MDWM, uses_lambda=True)
def _mdwm(target, source_means, lam, feature_key):
    return fit_mdwm(target, source_means, TransferParams(lam=lam), feature_key=feature_key)


@PipelineRegistry.register(PIPELINE_TARGET_ONLY, uses_lambda=False)
def _target_only(target, source_means, lam, feature_key):
    return fit_mdm(target, feature_key=feature_key)


@PipelineRegistry.register(PIPELINE_SOURCE_ONLY, uses_lambda=False)
def _source_only(target, source_means, lam, feature_key):
    return source_means
