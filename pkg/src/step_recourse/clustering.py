"""Clustering of the positively labeled points, one recourse direction each.

Lloyd's algorithm with a distance-weighted seeded initialization, best of
several restarts by within-cluster sum of squares. A uniform random assignment
mode is also provided for robustness experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import RecourseDataset
from .errors import DatasetError


@dataclass(frozen=True)
class Clustering:
    """Assignment of positive dataset rows to clusters.

    ``assignment`` maps dataset row index -> cluster id in [0, k). Centroids
    are the means of assigned points; a cluster left empty (possible only in
    random mode) gets a zero centroid.
    """

    k: int
    assignment: dict[int, int]
    centroids: np.ndarray
    seed: int

    def members(self, cluster_id: int) -> list[int]:
        return [row for row, c in self.assignment.items() if c == cluster_id]

    def cluster_points(self, dataset: RecourseDataset, cluster_id: int) -> np.ndarray:
        rows = self.members(cluster_id)
        if not rows:
            return np.empty((0, dataset.points.shape[1]))
        return dataset.points[np.array(rows)]

    def cluster_of_array(self, n: int) -> np.ndarray:
        out = np.full(n, -1, dtype=int)
        for row, c in self.assignment.items():
            out[row] = c
        return out


def _assign(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _wcss(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    return float(((points - centroids[labels]) ** 2).sum())


def _plusplus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    closest = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            # All remaining points coincide with a chosen centroid.
            centroids[j] = points[rng.integers(n)]
            continue
        probs = closest / total
        centroids[j] = points[rng.choice(n, p=probs)]
        closest = np.minimum(closest, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd(
    points: np.ndarray, k: int, rng: np.random.Generator, max_iters: int
) -> tuple[np.ndarray, np.ndarray]:
    centroids = _plusplus_init(points, k, rng)
    labels = _assign(points, centroids)
    for _ in range(max_iters):
        new_centroids = centroids.copy()
        for j in range(k):
            mask = labels == j
            if mask.any():
                new_centroids[j] = points[mask].mean(axis=0)
            else:
                # Re-seed an empty cluster at the point farthest from its centroid.
                far = ((points - centroids[labels]) ** 2).sum(axis=1).argmax()
                new_centroids[j] = points[far]
        new_labels = _assign(points, new_centroids)
        centroids = new_centroids
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    # Make centroids exact means of the final assignment.
    for j in range(k):
        mask = labels == j
        if mask.any():
            centroids[j] = points[mask].mean(axis=0)
    return labels, centroids


def kmeans_positive(
    dataset: RecourseDataset,
    k: int,
    seed: int = 0,
    max_iters: int = 100,
    restarts: int = 4,
) -> Clustering:
    """Cluster the positively labeled rows of ``dataset`` into k groups."""
    if k < 1:
        raise DatasetError(f"k must be >= 1, got {k}")
    pos_rows = dataset.positive_indices()
    if len(pos_rows) < k:
        raise DatasetError(
            f"need at least k={k} positive points, have {len(pos_rows)}"
        )
    points = dataset.points[pos_rows]
    rng = np.random.default_rng(seed)

    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for _ in range(max(1, restarts)):
        labels, centroids = _lloyd(points, k, rng, max_iters)
        score = _wcss(points, labels, centroids)
        if best is None or score < best[0]:
            best = (score, labels, centroids)
    _, labels, centroids = best
    assignment = {int(row): int(c) for row, c in zip(pos_rows, labels)}
    return Clustering(k=k, assignment=assignment, centroids=centroids, seed=seed)


def random_clustering(dataset: RecourseDataset, k: int, seed: int = 0) -> Clustering:
    """Assign each positive row a uniform random cluster id in [0, k)."""
    if k < 1:
        raise DatasetError(f"k must be >= 1, got {k}")
    pos_rows = dataset.positive_indices()
    if len(pos_rows) == 0:
        raise DatasetError("no positive points to cluster")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, k, size=len(pos_rows))
    centroids = np.zeros((k, dataset.points.shape[1]))
    for j in range(k):
        mask = labels == j
        if mask.any():
            centroids[j] = dataset.points[pos_rows[mask]].mean(axis=0)
    assignment = {int(row): int(c) for row, c in zip(pos_rows, labels)}
    return Clustering(k=k, assignment=assignment, centroids=centroids, seed=seed)
