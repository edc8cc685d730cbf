"""Evaluation metrics over recourse paths, per point of interest and aggregated.

Distance and path metrics are defined only for successful paths; the two
diversity metrics need at least two successful paths. Diversity averages the
pairwise terminal distances, while proximal diversity sums them and divides by
the farthest terminal's distance from the starting point; the asymmetry is
deliberate and matches each metric's definition.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .paths import RecoursePath

METRIC_NAMES = (
    "success",
    "avg_success",
    "l2_distance",
    "diversity",
    "path_length",
    "path_steps",
    "proximal_diversity",
)


def success(paths: list[RecoursePath]) -> int:
    """1 if any path succeeded, else 0."""
    if not paths:
        raise ValueError("need at least one path")
    return 1 if any(p.success for p in paths) else 0


def avg_success(paths: list[RecoursePath]) -> float:
    """Fraction of paths that succeeded."""
    if not paths:
        raise ValueError("need at least one path")
    return sum(1 for p in paths if p.success) / len(paths)


def l2_distance(path: RecoursePath) -> float:
    """Straight-line distance from the starting point to the terminal."""
    if not path.success:
        raise ValueError("l2_distance is defined for successful paths only")
    return float(np.linalg.norm(path.points[0] - path.terminal))


def path_length(path: RecoursePath) -> float:
    """Sum of hop distances along the path."""
    if not path.success:
        raise ValueError("path_length is defined for successful paths only")
    return float(
        sum(
            np.linalg.norm(path.points[i] - path.points[i - 1])
            for i in range(1, len(path.points))
        )
    )


def path_steps(path: RecoursePath) -> int:
    """Number of hops: point count minus one."""
    return path.steps_taken


def diversity(paths: list[RecoursePath]) -> float:
    """Mean pairwise distance between the terminals of successful paths."""
    terminals = [p.terminal for p in paths if p.success]
    if len(terminals) < 2:
        raise ValueError("diversity needs at least two successful paths")
    dists = [
        float(np.linalg.norm(terminals[i] - terminals[j]))
        for i in range(len(terminals))
        for j in range(i + 1, len(terminals))
    ]
    return sum(dists) / len(dists)


def proximal_diversity(poi: np.ndarray, paths: list[RecoursePath]) -> float:
    """Total pairwise terminal distance over the farthest terminal's distance."""
    poi = np.asarray(poi, dtype=float)
    terminals = [p.terminal for p in paths if p.success]
    if len(terminals) < 2:
        raise ValueError("proximal diversity needs at least two successful paths")
    total = sum(
        float(np.linalg.norm(terminals[i] - terminals[j]))
        for i in range(len(terminals))
        for j in range(i + 1, len(terminals))
    )
    furthest = max(float(np.linalg.norm(poi - t)) for t in terminals)
    if furthest == 0.0:
        return 0.0
    return total / furthest


def per_poi_metrics(poi: np.ndarray, paths: list[RecoursePath]) -> dict:
    """All metrics for one point of interest; undefined metrics are omitted."""
    out: dict = {
        "success": success(paths),
        "avg_success": avg_success(paths),
    }
    successful = [p for p in paths if p.success]
    if successful:
        out["l2_distance"] = sum(l2_distance(p) for p in successful) / len(successful)
        out["path_length"] = sum(path_length(p) for p in successful) / len(successful)
        out["path_steps"] = sum(path_steps(p) for p in successful) / len(successful)
    if len(successful) >= 2:
        out["diversity"] = diversity(paths)
        out["proximal_diversity"] = proximal_diversity(poi, paths)
    return out


@dataclass(frozen=True)
class MetricsReport:
    """Per-PoI metric rows plus mean and standard error per metric."""

    per_poi: tuple[dict, ...]
    aggregate: dict
    trials: int

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "aggregate": self.aggregate,
            "per_poi": list(self.per_poi),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        """One aggregate row: metric means then their standard errors."""
        header = list(METRIC_NAMES) + [f"stderr_{m}" for m in METRIC_NAMES]
        row = []
        for m in METRIC_NAMES:
            entry = self.aggregate.get(m)
            row.append("" if entry is None else repr(entry["mean"]))
        for m in METRIC_NAMES:
            entry = self.aggregate.get(m)
            row.append("" if entry is None else repr(entry["stderr"]))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerow(row)
        return buf.getvalue()


def aggregate_metrics(rows: list[dict], trials: int) -> MetricsReport:
    """Aggregate per-PoI rows (across all trials) into mean and standard error.

    Each metric averages over the rows where it is defined; the standard error
    is the sample standard deviation over those rows divided by sqrt(count),
    zero when only one row defines the metric.
    """
    aggregate: dict = {}
    for m in METRIC_NAMES:
        values = [row["metrics"][m] for row in rows if m in row["metrics"]]
        if not values:
            continue
        arr = np.asarray(values, dtype=float)
        stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        aggregate[m] = {
            "mean": float(arr.mean()),
            "stderr": stderr,
            "count": len(arr),
        }
    return MetricsReport(per_poi=tuple(rows), aggregate=aggregate, trials=trials)
