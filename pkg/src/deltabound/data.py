"""Dataset container and CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingColumn, ParseError


@dataclass
class LabeledDataset:
    """Feature matrix plus integer labels in {0..K-1}."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str] | None = field(default=None)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.features.ndim != 2 or len(self.features) < 1:
            raise ValueError("features must be a nonempty n x d matrix")
        if len(self.labels) != len(self.features):
            raise ValueError("labels and features disagree on n")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain NaN/Inf")
        if self.labels.min() < 0:
            raise ValueError("labels must be nonnegative")
        if self.feature_names is not None and len(self.feature_names) != self.n_features:
            raise ValueError("feature_names length mismatch")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1


def load_csv_dataset(
    path: str,
    label_column: str,
    positive_label: str | None = None,
    ignore_columns: tuple[str, ...] = (),
) -> LabeledDataset:
    """Read a header-row CSV into a LabeledDataset.

    Features are all non-label, non-ignored columns in header order. Labels
    are mapped to {0, 1, ...} by first occurrence, or, for binary data with
    ``positive_label`` given, that value maps to 1 and everything else to 0.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if label_column not in header:
            raise MissingColumn(f"{path}: no column named {label_column!r}")
        skip = set(ignore_columns) | {label_column}
        feature_cols = [(i, name) for i, name in enumerate(header) if name not in skip]
        label_idx = header.index(label_column)

        rows, raw_labels = [], []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
            values = []
            for col_idx, name in feature_cols:
                try:
                    values.append(float(row[col_idx]))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {row_no}, column {name!r}: "
                        f"non-numeric value {row[col_idx]!r}"
                    ) from None
            rows.append(values)
            raw_labels.append(row[label_idx])

    if not rows:
        raise ParseError(f"{path}: no data rows")

    if positive_label is not None:
        labels = [1 if v == positive_label else 0 for v in raw_labels]
    else:
        mapping: dict[str, int] = {}
        labels = []
        for v in raw_labels:
            if v not in mapping:
                mapping[v] = len(mapping)
            labels.append(mapping[v])

    return LabeledDataset(
        features=np.asarray(rows, dtype=float),
        labels=np.asarray(labels, dtype=int),
        feature_names=[name for _, name in feature_cols],
    )
