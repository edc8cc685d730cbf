"""CSV ingestion, scaling-stat fitting, and the encoded dataset container.

Labels in a :class:`RecourseDataset` always come from the model at the
configured confidence threshold, never from the CSV target column; the target
column is only ever used as training data for a model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DatasetError, SchemaError
from .schema import FeatureSchema, load_schema

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawTable:
    """Validated raw rows: feature columns as strings, plus target values."""

    records: tuple[dict, ...]
    ids: tuple[int, ...]
    targets: tuple[str, ...] | None
    dropped_rows: int


@dataclass(frozen=True)
class RecourseDataset:
    """Encoded points with model-assigned labels and optional cluster ids.

    ``labels`` holds -1/+1 per row; ``cluster_of`` (when present) holds a
    cluster index for positively labeled rows and -1 for negative rows.
    """

    schema: FeatureSchema
    points: np.ndarray
    raw_ids: tuple[int, ...]
    labels: np.ndarray
    cluster_of: np.ndarray | None = None
    dropped_rows: int = 0

    def __post_init__(self) -> None:
        if self.points.ndim != 2 or self.points.shape[1] != self.schema.encoded_dim:
            raise DatasetError(
                f"points have shape {self.points.shape}, expected "
                f"(n, {self.schema.encoded_dim})"
            )
        if not np.all(np.isfinite(self.points)):
            raise DatasetError("points contain non-finite values")
        for f, start, stop in self.schema.spans():
            if f.kind != "categorical":
                continue
            block = self.points[:, start:stop]
            if not (np.all((block == 0.0) | (block == 1.0)) and np.all(block.sum(axis=1) == 1.0)):
                raise DatasetError(f"one-hot block for {f.name!r} is not a valid indicator")
        if len(self.labels) != len(self.points):
            raise DatasetError("labels and points disagree on row count")
        if self.cluster_of is not None:
            pos = self.labels == 1
            if np.any(self.cluster_of[~pos] != -1) or np.any(self.cluster_of[pos] < 0):
                raise DatasetError("cluster_of must cover exactly the positive rows")

    @property
    def n(self) -> int:
        return len(self.points)

    def positive_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 1)

    def with_cluster_of(self, cluster_of: np.ndarray) -> "RecourseDataset":
        return replace(self, cluster_of=np.asarray(cluster_of, dtype=int))


def read_table(csv_path: str | Path, schema: FeatureSchema) -> RawTable:
    """Read a CSV, validate columns against the schema, drop incomplete rows.

    Rows with a missing value in any feature column (or the target column,
    when the schema names one) are dropped and the count is reported.
    """
    try:
        # dtype=str keeps raw values verbatim; the standard NA sentinels
        # ("", "NA", "NaN", ...) still parse as missing and get dropped.
        frame = pd.read_csv(csv_path, dtype=str)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DatasetError(f"cannot read CSV {csv_path}: {exc}") from exc

    feature_names = [f.name for f in schema.features]
    missing_cols = [name for name in feature_names if name not in frame.columns]
    if missing_cols:
        raise SchemaError(f"CSV {csv_path} is missing columns {missing_cols}")
    required = list(feature_names)
    if schema.target_name is not None:
        if schema.target_name not in frame.columns:
            raise SchemaError(
                f"CSV {csv_path} is missing target column {schema.target_name!r}"
            )
        required.append(schema.target_name)

    complete = frame[required].notna().all(axis=1)
    dropped = int((~complete).sum())
    if dropped:
        log.info("dropped %d rows with missing values from %s", dropped, csv_path)
    kept = frame[complete]
    if len(kept) == 0:
        raise DatasetError(f"no usable rows left in {csv_path} after dropping {dropped}")

    records = tuple(
        {name: row[name] for name in feature_names} for _, row in kept.iterrows()
    )
    targets = (
        tuple(kept[schema.target_name].tolist())
        if schema.target_name is not None
        else None
    )
    return RawTable(
        records=records,
        ids=tuple(int(i) for i in kept.index),
        targets=targets,
        dropped_rows=dropped,
    )


def fit_scaling_stats(table: RawTable, schema: FeatureSchema) -> FeatureSchema:
    """Compute per-continuous-feature mean/std from the given rows.

    Uses the population standard deviation. Constant columns are rejected,
    since a zero std cannot scale.
    """
    stats: dict[str, tuple[float, float]] = {}
    for f in schema.features:
        if f.kind != "continuous":
            continue
        try:
            values = np.array([float(r[f.name]) for r in table.records])
        except ValueError as exc:
            raise DatasetError(f"non-numeric value in continuous column {f.name!r}") from exc
        if not np.all(np.isfinite(values)):
            raise DatasetError(f"non-finite value in continuous column {f.name!r}")
        std = float(values.std())
        if std <= 0:
            raise DatasetError(f"continuous column {f.name!r} is constant")
        stats[f.name] = (float(values.mean()), std)
    return schema.with_scaling_stats(stats)


def encode_table(table: RawTable, schema: FeatureSchema) -> np.ndarray:
    """Encode every row of a raw table; schema must carry scaling stats."""
    if not schema.has_scaling_stats():
        raise SchemaError("schema has no scaling stats; fit them first")
    return np.array([schema.encode_record(r) for r in table.records])


def binary_targets(table: RawTable, schema: FeatureSchema) -> np.ndarray:
    """Map the CSV target column to {0, 1} using the schema's positive value."""
    if table.targets is None or schema.target_name is None:
        raise DatasetError("table has no target column to train from")
    positive = str(schema.target_positive_value)
    return np.array([1.0 if str(t) == positive else 0.0 for t in table.targets])


def load_dataset(
    csv_path: str | Path,
    schema_path: str | Path,
    model,
    threshold: float,
) -> RecourseDataset:
    """Load a CSV into an encoded dataset labeled by the model.

    Scaling stats come from the schema document when present; otherwise they
    are fitted on this CSV (which then plays the training-split role).
    """
    if not 0 < threshold < 1:
        raise DatasetError(f"threshold must be in (0, 1), got {threshold}")
    schema = load_schema(schema_path)
    table = read_table(csv_path, schema)
    if not schema.has_scaling_stats():
        schema = fit_scaling_stats(table, schema)
    points = encode_table(table, schema)
    from .models import classify_batch

    labels = classify_batch(model, points, threshold)
    return RecourseDataset(
        schema=schema,
        points=points,
        raw_ids=table.ids,
        labels=labels,
        dropped_rows=table.dropped_rows,
    )
