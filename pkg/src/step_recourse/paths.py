"""Direction computation and iterative recourse-path generation.

The direction toward a cluster is the exact sum, over the cluster's positively
classified points, of the offset to each point weighted by a non-increasing
function of its distance:

    sum over x' of (x' - x) * alpha(||x' - x||) * [model labels x' positive]

Nearby positive points therefore pull harder, negatively classified points
contribute nothing at all, and an empty cluster yields the zero vector.
A path follows these directions one unit step at a time, projecting each step
onto the feature constraints, until the model flips or an iteration cap hits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .alpha import bounded_alpha, default_alpha
from .clustering import Clustering
from .data import RecourseDataset
from .errors import ConfigError, RecourseError, ZeroDirectionError
from .models import DEFAULT_THRESHOLD, Model, classify_batch
from .schema import FeatureSchema, project_constraints

DEFAULT_STEP_SIZE = 1.0
DEFAULT_MAX_ITERATIONS = 50


@dataclass(frozen=True, eq=False)
class Direction:
    """A movement vector in encoded feature space, tagged with its cluster."""

    vector: np.ndarray
    cluster_id: int = 0
    privatized: bool = False


@dataclass(frozen=True, eq=False)
class RecoursePath:
    """An ordered point sequence from a starting point, with a success flag."""

    points: tuple[np.ndarray, ...]
    cluster_id: int
    success: bool

    @property
    def steps_taken(self) -> int:
        return len(self.points) - 1

    @property
    def terminal(self) -> np.ndarray:
        return self.points[-1]

    def to_dict(self) -> dict:
        return {
            "cluster": self.cluster_id,
            "success": self.success,
            "points": [[float(v) for v in p] for p in self.points],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RecoursePath":
        return cls(
            points=tuple(np.asarray(p, dtype=float) for p in doc["points"]),
            cluster_id=int(doc["cluster"]),
            success=bool(doc["success"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class PathConfig:
    """Knobs for path generation; defaults match the standard protocol."""

    step_size: float = DEFAULT_STEP_SIZE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    threshold: float = DEFAULT_THRESHOLD
    privacy: "object | None" = None  # PrivacyParams, kept loose to avoid an import cycle

    def __post_init__(self) -> None:
        if self.step_size <= 0:
            raise ConfigError(f"step_size must be > 0, got {self.step_size}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0 < self.threshold < 1:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")


def _pull_sum(poi: np.ndarray, positives: np.ndarray, alpha) -> np.ndarray:
    """Weighted sum of offsets toward already-filtered positive points.

    Rows are summed in their given order so that dropping a non-member point
    leaves the result bit-identical.
    """
    if len(positives) == 0:
        return np.zeros_like(poi)
    diffs = positives - poi
    dists = np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    weights = np.asarray(alpha(dists), dtype=float)
    return (diffs * weights[:, None]).sum(axis=0)


def step_direction(
    poi: np.ndarray,
    cluster_points: Sequence[np.ndarray] | np.ndarray,
    model: Model,
    alpha=None,
    threshold: float = DEFAULT_THRESHOLD,
    cluster_id: int = 0,
) -> Direction:
    """Exact per-term direction toward a cluster's positively classified points."""
    poi = np.asarray(poi, dtype=float)
    if not np.all(np.isfinite(poi)):
        raise RecourseError("point of interest has non-finite entries")
    if alpha is None:
        alpha = default_alpha()
    pts = np.asarray(cluster_points, dtype=float)
    if pts.size == 0:
        return Direction(vector=np.zeros_like(poi), cluster_id=cluster_id)
    pts = pts.reshape(len(pts), -1)
    if not np.all(np.isfinite(pts)):
        raise RecourseError("cluster points have non-finite entries")
    positives = pts[classify_batch(model, pts, threshold) == 1]
    return Direction(vector=_pull_sum(poi, positives, alpha), cluster_id=cluster_id)


def apply_step(
    poi: np.ndarray,
    direction: Direction,
    schema: FeatureSchema,
    step_size: float = DEFAULT_STEP_SIZE,
) -> np.ndarray:
    """Move one step of the given magnitude along a direction, then project.

    The direction is rescaled to the requested magnitude before the move;
    constraint projection afterwards may shorten the effective displacement.
    A zero direction means no recourse is available from this cluster.
    """
    vec = np.asarray(direction.vector, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ZeroDirectionError("cannot step along a zero direction")
    proposed = np.asarray(poi, dtype=float) + vec * (step_size / norm)
    return project_constraints(poi, proposed, schema)


def generate_paths(
    poi: np.ndarray,
    dataset: RecourseDataset,
    clustering: Clustering,
    model: Model,
    alpha=None,
    config: PathConfig = PathConfig(),
    direction_hook: Callable[[Direction], Direction] | None = None,
) -> list[RecoursePath]:
    """Generate one recourse path per cluster for a point of interest.

    Each cluster is walked independently: direction, optional privatization,
    optional hook (e.g. user-interference noise), unit step, repeat while the
    model still says negative and the iteration cap is not reached. A zero
    direction ends that cluster's path unsuccessfully rather than raising.

    A point that is already positively classified gets k trivial zero-step
    successful paths.
    """
    poi = np.asarray(poi, dtype=float)
    if alpha is None:
        alpha = default_alpha()

    privacy = config.privacy
    if privacy is not None:
        if clustering.k > 1 and not privacy.allow_with_clustering:
            raise ConfigError(
                "privacy guarantees are not audited with k > 1 clustering; "
                "set allow_with_clustering to override"
            )
        alpha = bounded_alpha(alpha, privacy.sensitivity_bound)
        from .privacy import privatize_direction

    if model.classify(poi, config.threshold) == 1:
        return [
            RecoursePath(points=(poi,), cluster_id=c, success=True)
            for c in range(clustering.k)
        ]

    paths: list[RecoursePath] = []
    for c in range(clustering.k):
        pts = clustering.cluster_points(dataset, c)
        if len(pts):
            positives = pts[classify_batch(model, pts, config.threshold) == 1]
        else:
            positives = pts
        x = poi
        points = [poi]
        success = False
        for step in range(config.max_iterations):
            direction = Direction(vector=_pull_sum(x, positives, alpha), cluster_id=c)
            if privacy is not None:
                step_seed = np.random.SeedSequence(
                    [int(privacy.seed), c, step]
                ).generate_state(1)[0]
                direction = privatize_direction(direction, privacy.sigma, int(step_seed))
            if direction_hook is not None:
                direction = direction_hook(direction)
            if float(np.linalg.norm(direction.vector)) == 0.0:
                break
            x = apply_step(x, direction, dataset.schema, config.step_size)
            points.append(x)
            if model.classify(x, config.threshold) == 1:
                success = True
                break
        paths.append(RecoursePath(points=tuple(points), cluster_id=c, success=success))
    return paths
