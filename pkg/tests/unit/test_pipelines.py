from __future__ import annotations

import numpy as np
import pytest

from core.domain.classes import ClassMeans
from core.services.classifiers import fit_mdm
from core.services.pipelines import PipelineRegistry
from core.utils.errors import ValidationError
from tests.factories import random_spd_set

pytestmark = pytest.mark.unit


@pytest.fixture
def calibration(rng):
    mats = random_spd_set(rng, 4, 3)
    return [(m, "a" if i % 2 == 0 else "b") for i, m in enumerate(mats)]


@pytest.fixture
def source(rng) -> ClassMeans:
    a, b = random_spd_set(rng, 2, 3)
    return ClassMeans(means={"a": a, "b": b})


def test_builtin_pipelines_are_registered():
    assert PipelineRegistry.list_registered() == ["mdm-source-only", "mdm-target-only", "mdwm"]
    assert PipelineRegistry.get("mdwm").uses_lambda
    assert not PipelineRegistry.get("mdm-target-only").uses_lambda


def test_unknown_pipeline_lists_alternatives():
    with pytest.raises(ValidationError, match="mdm-target-only"):
        PipelineRegistry.resolve(["mdwm", "riemann-svm"])


def test_resolve_keeps_order():
    names = [p.name for p in PipelineRegistry.resolve(["mdm-target-only", "mdwm"])]
    assert names == ["mdm-target-only", "mdwm"]


def test_pipeline_semantics(calibration, source):
    target_only = PipelineRegistry.get("mdm-target-only").fit(calibration, source, 0.3)
    expected = fit_mdm(calibration)
    for label in ("a", "b"):
        np.testing.assert_allclose(target_only[label].values, expected[label].values)

    assert PipelineRegistry.get("mdm-source-only").fit(calibration, source, 0.3) is source

    at_zero = PipelineRegistry.get("mdwm").fit(calibration, source, 0.0)
    at_one = PipelineRegistry.get("mdwm").fit(calibration, source, 1.0)
    for label in ("a", "b"):
        np.testing.assert_allclose(at_zero[label].values, expected[label].values, atol=1e-10)
        np.testing.assert_allclose(at_one[label].values, source[label].values, atol=1e-10)
