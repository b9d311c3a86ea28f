"""
Text outputs of evaluation and meta-analysis runs.

All writers produce byte-identical files for identical inputs: fixed column
order, fixed float rendering and no timestamps.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import pandas as pd

from core.domain.meta import MetaResult
from core.domain.scores import ScoreTable
from core.utils.constants import META_COLUMNS, SCORE_COLUMNS
from core.utils.errors import MalformedHeaderError

logger = logging.getLogger(__name__)

COMBINED_ROW = "combined"


def _sig6(value: float) -> str:
    return f"{value:.6g}"


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"wrote {len(frame)} rows to {path}")
    return path


def write_scores(table: ScoreTable, path: str | Path) -> Path:
    """ScoreTable as CSV: scores and timings to 6 significant digits, lambda in shortest form."""
    frame = table.frame.copy()
    frame["lambda"] = frame["lambda"].map(lambda v: f"{v:g}")
    for column in ("balanced_accuracy", "train_seconds", "test_seconds"):
        frame[column] = frame[column].map(_sig6)
    return _write_frame(frame, Path(path))


def read_scores(path: str | Path) -> ScoreTable:
    source = Path(path)
    with source.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header != ",".join(SCORE_COLUMNS):
        raise MalformedHeaderError(
            f"{source} does not start with the score header {','.join(SCORE_COLUMNS)!r}"
        )
    frame = pd.read_csv(source, dtype={"dataset": str, "subject": str, "pipeline": str})
    return ScoreTable(frame)


def write_summary(table: ScoreTable, path: str | Path) -> Path:
    """Accuracy versus calibration size: one row per (dataset, pipeline, n_train, lambda)."""
    frame = table.summarize()
    frame["lambda"] = frame["lambda"].map(lambda v: f"{v:g}")
    for column in ("mean_balanced_accuracy", "std_balanced_accuracy"):
        frame[column] = frame[column].map(lambda v: "" if pd.isna(v) else _sig6(v))
    return _write_frame(frame, Path(path))


def summary_path(scores_path: str | Path) -> Path:
    p = Path(scores_path)
    return p.with_name(f"{p.stem}_summary.csv")


def meta_frame(result: MetaResult) -> pd.DataFrame:
    rows = [
        (d.dataset, d.n_subjects, _sig6(d.smd), _sig6(d.p_value), d.stars) for d in result.datasets
    ]
    rows.append(
        (
            COMBINED_ROW,
            result.total_subjects,
            _sig6(result.combined_smd),
            _sig6(result.combined_p_value),
            result.stars,
        )
    )
    return pd.DataFrame(rows, columns=list(META_COLUMNS))


def write_meta(result: MetaResult, path: str | Path) -> Path:
    return _write_frame(meta_frame(result), Path(path))


def render_meta_report(result: MetaResult) -> str:
    lines = [
        f"{result.method_a} vs {result.method_b} at n={result.n_train}, lambda={result.lam:g} "
        f"(alternative: {result.alternative})",
        f"{'dataset':<24} {'subjects':>8} {'mean diff':>10} {'SMD':>9} {'p':>10}  stars",
    ]
    for d in result.datasets:
        lines.append(
            f"{d.dataset:<24} {d.n_subjects:>8d} {d.mean_difference:>+10.4f} {d.smd:>+9.3f} "
            f"{d.p_value:>10.4g}  {d.stars}"
        )
    lines.append(
        f"{COMBINED_ROW:<24} {result.total_subjects:>8d} {'':>10} {result.combined_smd:>+9.3f} "
        f"{result.combined_p_value:>10.4g}  {result.stars}"
    )
    return "\n".join(lines)


def provenance_path(output: str | Path) -> Path:
    p = Path(output)
    return p.with_name(f"{p.name}.provenance.json")


def write_provenance(output: str | Path, command: str, config: dict[str, Any], version: str) -> Path:
    """Resolved configuration beside an output; holds no wall-clock data."""
    target = provenance_path(output)
    record = {"command": command, "config": config, "version": version}
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(record, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return target
