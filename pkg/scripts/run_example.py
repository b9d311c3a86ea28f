"""Desk-scale reproduction: generate the default synthetic dataset, evaluate, meta-analyse.

Usage: python scripts/run_example.py [WORKDIR]
"""

from __future__ import annotations

from pathlib import Path
import sys

from core.interfaces.cli_interface import main


def reproduce(workdir: Path) -> int:
    dataset = workdir / "synthetic"
    scores = workdir / "scores.csv"
    steps = [
        ["generate", "--seed", "7", "--out", str(dataset)],
        ["eval", str(dataset), "--n", "8", "--lambda", "0", "--lambda", "0.7", "--out", str(scores)],
        ["meta", "--scores", str(scores), "--n", "8", "--lambda", "0.7", "--out", str(workdir / "meta.csv")],
    ]
    for argv in steps:
        rc = main(argv)
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(reproduce(Path(sys.argv[1] if len(sys.argv) > 1 else "runs/example")))
