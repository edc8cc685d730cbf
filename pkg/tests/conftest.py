import csv
import math

import numpy as np
import pytest

from step_recourse.data import RecourseDataset
from step_recourse.models import LogisticModel, LookupModel
from step_recourse.schema import FeatureSchema, FeatureSpec

LOGIT_07 = math.log(0.7 / 0.3)


def continuous_schema(m: int, mutability: tuple[str, ...] | None = None) -> FeatureSchema:
    """m continuous features with identity scaling (scaled == raw)."""
    mut = mutability or ("free",) * m
    return FeatureSchema(
        features=tuple(
            FeatureSpec(f"x{i}", "continuous", mutability=mut[i], scale_mean=0.0, scale_std=1.0)
            for i in range(m)
        )
    )


def mixed_schema() -> FeatureSchema:
    """One of each feature kind, with varied mutability."""
    return FeatureSchema(
        features=(
            FeatureSpec("income", "continuous", "free", scale_mean=50.0, scale_std=10.0),
            FeatureSpec("age", "continuous", "immutable", scale_mean=40.0, scale_std=12.0),
            FeatureSpec(
                "education", "ordinal", "increase_only", levels=("low", "mid", "high")
            ),
            FeatureSpec(
                "housing", "categorical", "free", categories=("rent", "own", "other")
            ),
        ),
        target_name="approved",
        target_positive_value="yes",
    )


def make_dataset(points: np.ndarray, labels, schema: FeatureSchema | None = None) -> RecourseDataset:
    points = np.asarray(points, dtype=float)
    schema = schema or continuous_schema(points.shape[1])
    return RecourseDataset(
        schema=schema,
        points=points,
        raw_ids=tuple(range(len(points))),
        labels=np.asarray(labels, dtype=int),
    )


def threshold_1d_model(boundary: float = 1.0, sharpness: float = 10.0, width: int = 1) -> LogisticModel:
    """Confidence >= 0.7 exactly when the first coordinate >= boundary."""
    weights = np.zeros(width)
    weights[0] = sharpness
    return LogisticModel(weights=weights, bias=-sharpness * boundary + LOGIT_07)


def lookup_model(points, labels, default_label: int = -1) -> LookupModel:
    return LookupModel(np.asarray(points, dtype=float), labels, default_label)


def write_blob_csv(csv_path, schema_path, n=200, seed=0, centers=((-2.0, 0.0), (2.0, 0.0)), spread=1.0):
    """Two Gaussian blobs labeled bad/good, plus a matching schema document."""
    rng = np.random.default_rng(seed)
    half = n // 2
    neg = rng.normal(centers[0], spread, size=(half, 2))
    pos = rng.normal(centers[1], spread, size=(n - half, 2))
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f1", "f2", "outcome"])
        for row in neg:
            writer.writerow([f"{row[0]:.6f}", f"{row[1]:.6f}", "bad"])
        for row in pos:
            writer.writerow([f"{row[0]:.6f}", f"{row[1]:.6f}", "good"])
    schema_doc = {
        "features": [
            {"name": "f1", "kind": "continuous", "mutability": "free"},
            {"name": "f2", "kind": "continuous", "mutability": "free"},
        ],
        "target": {"name": "outcome", "positive_value": "good"},
    }
    import json

    with open(schema_path, "w", encoding="utf-8") as fh:
        json.dump(schema_doc, fh)


@pytest.fixture
def blob_files(tmp_path):
    csv_path = tmp_path / "blobs.csv"
    schema_path = tmp_path / "schema.json"
    write_blob_csv(csv_path, schema_path)
    return csv_path, schema_path
