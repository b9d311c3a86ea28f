from __future__ import annotations

import os
from pathlib import Path
import sys

import numpy as np
import pytest


def _ensure_repo_root_on_path() -> None:
    # tests/ -> repo root
    root = Path(__file__).resolve().parents[1]
    p = str(root)
    if p not in sys.path:
        sys.path.insert(0, p)


_ensure_repo_root_on_path()

# Test runtime environment hardening: deterministic, single-process, untimed runs
# regardless of the developer's environment or .env file.
os.environ["MDWM_JOBS"] = "1"
os.environ["MDWM_LOG_LEVEL"] = "WARNING"
os.environ["MDWM_TIMINGS"] = "0"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def small_dataset():
    from tests.factories import DatasetFactory

    return DatasetFactory().build()


@pytest.fixture(scope="session")
def default_dataset():
    """The default synthetic dataset (seed 7, 8 subjects, 4 classes, 8 channels)."""
    from core.domain.dataset import SynthConfig
    from core.services.synthetic import generate_synthetic

    return generate_synthetic(SynthConfig())
