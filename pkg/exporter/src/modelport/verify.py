"""Prediction-agreement check between a source estimator and its export.

The exported file is evaluated through the deltabound command line (batch
prediction mode), never by importing it, so the check exercises exactly what
a downstream consumer of the JSON would run.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from .errors import ExtractionError, MismatchError


def primary_command() -> list[str]:
    exe = shutil.which("deltabound")
    if exe:
        return [exe]
    return [sys.executable, "-m", "deltabound.cli"]


def sample_points(n_features: int, n_points: int, seed: int,
                  nonnegative: bool = False) -> np.ndarray:
    rng = np.random.default_rng(seed)
    points = rng.normal(size=(n_points, n_features))
    if nonnegative:
        points = np.abs(points)
    return points


def _predict_exported(exported: str, points: np.ndarray) -> list[int]:
    with tempfile.TemporaryDirectory() as tmp:
        pts_path = Path(tmp) / "points.csv"
        pts_path.write_text(
            "\n".join(",".join(repr(float(v)) for v in row) for row in points)
            + "\n"
        )
        proc = subprocess.run(
            [*primary_command(), "attack", "--model", exported,
             "--points-file", str(pts_path), "--predict-only",
             "--format", "json"],
            capture_output=True, text=True,
        )
    if proc.returncode != 0:
        raise ExtractionError(
            f"deltabound CLI failed (exit {proc.returncode}): {proc.stderr.strip()}"
        )
    return json.loads(proc.stdout)["labels"]


def verify_roundtrip(model, exported: str, n_points: int = 100,
                     seed: int = 7) -> float:
    """Fraction of seeded random points on which both predictions agree.

    Raises MismatchError (listing the disagreeing point indices) whenever the
    rate is below 1.0, so a successful return always means full agreement.
    """
    with open(exported, encoding="utf-8") as fh:
        doc = json.load(fh)
    points = sample_points(doc["n_features"], n_points, seed,
                           nonnegative=doc["family"] == "mnb")
    classes = list(np.asarray(model.classes_))
    source = [classes.index(p) for p in model.predict(points)]
    ported = _predict_exported(exported, points)
    bad = [i for i, (a, b) in enumerate(zip(source, ported)) if a != b]
    if bad:
        rate = 1.0 - len(bad) / n_points
        raise MismatchError(
            f"agreement {rate:.4f} < 1.0; disagreeing points: {bad}", bad
        )
    return 1.0
