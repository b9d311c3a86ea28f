"""
Directory format for datasets.

Layout::

    <dir>/dataset.json          header (format_version "1")
    <dir>/subject_000.f64       little-endian float64, (trial, channel, time) order
    <dir>/subject_000.labels    one label per line, one line per trial

The binary files hold the raw IEEE-754 values, so a save/load round trip is
bit-exact.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from pydantic import Field, ValidationError as PydanticValidationError

from core.domain.base_model import BaseModel
from core.domain.dataset import Dataset, DatasetParadigm, SubjectRecord
from core.domain.trial import Trial
from core.utils.constants import DATASET_FORMAT_VERSION
from core.utils.errors import (
    DimensionInconsistencyError,
    MalformedHeaderError,
    UnknownFormatVersionError,
)

logger = logging.getLogger(__name__)

HEADER_FILE = "dataset.json"
_DTYPE = np.dtype("<f8")


class SubjectEntry(BaseModel):
    subject_id: str
    data_file: str
    labels_file: str
    n_trials: int = Field(ge=1)


class DatasetHeader(BaseModel):
    format_version: str
    name: str
    paradigm: DatasetParadigm
    sampling_rate: float = Field(gt=0)
    labels: tuple[str, ...]
    channels: int = Field(ge=1)
    samples: int = Field(ge=1)
    subjects: tuple[SubjectEntry, ...]


def save_dataset(ds: Dataset, path: str | Path) -> Path:
    """Write ``ds`` into directory ``path`` (created if needed)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, subject in enumerate(ds.subjects):
        stem = f"subject_{i:03d}"
        block = np.stack([t.signal for t in subject.trials]).astype(_DTYPE, copy=False)
        (root / f"{stem}.f64").write_bytes(np.ascontiguousarray(block).tobytes())
        (root / f"{stem}.labels").write_text("".join(f"{label}\n" for label in subject.labels), encoding="utf-8")
        entries.append(
            SubjectEntry(
                subject_id=subject.subject_id,
                data_file=f"{stem}.f64",
                labels_file=f"{stem}.labels",
                n_trials=len(subject.trials),
            )
        )
    header = DatasetHeader(
        format_version=DATASET_FORMAT_VERSION,
        name=ds.name,
        paradigm=ds.paradigm,
        sampling_rate=ds.sampling_rate,
        labels=ds.labels,
        channels=ds.channels,
        samples=ds.samples,
        subjects=tuple(entries),
    )
    (root / HEADER_FILE).write_text(
        json.dumps(header.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8"
    )
    logger.info(f"saved dataset {ds.name!r} ({len(ds.subjects)} subjects) to {root}")
    return root


def read_header(path: str | Path) -> DatasetHeader:
    header_path = Path(path) / HEADER_FILE
    try:
        raw = json.loads(header_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise MalformedHeaderError(f"{header_path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise MalformedHeaderError(f"{header_path} must hold a JSON object")
    version = raw.get("format_version")
    if version is None:
        raise MalformedHeaderError(f"{header_path} lacks the mandatory format_version field")
    if str(version) != DATASET_FORMAT_VERSION:
        raise UnknownFormatVersionError(
            f"{header_path} has format_version {version!r}; this tool reads version {DATASET_FORMAT_VERSION!r}"
        )
    try:
        return DatasetHeader.model_validate(raw)
    except PydanticValidationError as e:
        raise MalformedHeaderError(f"{header_path} is malformed: {e}") from e


def _load_subject(root: Path, entry: SubjectEntry, header: DatasetHeader) -> SubjectRecord:
    data_path = root / entry.data_file
    per_trial = header.channels * header.samples
    expected = entry.n_trials * per_trial * _DTYPE.itemsize
    size = data_path.stat().st_size
    if size != expected:
        raise DimensionInconsistencyError(
            f"{data_path} holds {size} bytes; header implies {entry.n_trials} trials x "
            f"{header.channels} channels x {header.samples} samples = {expected} bytes"
        )
    block = np.fromfile(data_path, dtype=_DTYPE).reshape(entry.n_trials, header.channels, header.samples)
    labels = (root / entry.labels_file).read_text(encoding="utf-8").splitlines()
    if len(labels) != entry.n_trials:
        raise DimensionInconsistencyError(
            f"{root / entry.labels_file} lists {len(labels)} labels for {entry.n_trials} trials"
        )
    trials = tuple(
        Trial(signal=block[j].astype(np.float64), label=label) for j, label in enumerate(labels)
    )
    return SubjectRecord(subject_id=entry.subject_id, trials=trials)


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset directory written by :func:`save_dataset`."""
    root = Path(path)
    header = read_header(root)
    subjects = tuple(_load_subject(root, entry, header) for entry in header.subjects)
    logger.info(f"loaded dataset {header.name!r} ({len(subjects)} subjects) from {root}")
    return Dataset(
        name=header.name,
        paradigm=header.paradigm,
        sampling_rate=header.sampling_rate,
        labels=header.labels,
        subjects=subjects,
    )
