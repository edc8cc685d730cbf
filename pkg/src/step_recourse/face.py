"""Graph-based recourse baseline: neighborhood graph plus shortest paths.

An undirected graph joins every pair of points closer (strictly) than a
distance threshold, with the l2 distance as the edge weight. Recourse for a
point of interest is the set of shortest paths from it to the nearest
positively classified dataset points.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .data import RecourseDataset
from .errors import ConfigError
from .models import DEFAULT_THRESHOLD, Model, classify_batch
from .paths import RecoursePath

DEFAULT_DISTANCE_THRESHOLD = 3.0
DEFAULT_MAX_PATH_NODES = 50


@dataclass(frozen=True, eq=False)
class RecourseGraph:
    """Neighborhood graph over dataset rows plus one query node.

    Node ids 0..n-1 are dataset rows; node n is the point of interest.
    ``adjacency[u]`` lists (v, weight) with weight strictly below the
    threshold; the graph is symmetric and has no self-edges.
    """

    points: np.ndarray
    adjacency: tuple[tuple[tuple[int, float], ...], ...]
    distance_threshold: float
    poi_node: int

    @property
    def n_nodes(self) -> int:
        return len(self.points)


def dataset_adjacency(
    points: np.ndarray, distance_threshold: float
) -> list[list[tuple[int, float]]]:
    """Adjacency lists among dataset rows only; reusable across query points."""
    n = len(points)
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    if n == 0:
        return adjacency
    dists = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))
    for u in range(n):
        for v in range(u + 1, n):
            w = float(dists[u, v])
            if w < distance_threshold:
                adjacency[u].append((v, w))
                adjacency[v].append((u, w))
    return adjacency


def build_graph(
    dataset: RecourseDataset,
    poi: np.ndarray,
    distance_threshold: float = DEFAULT_DISTANCE_THRESHOLD,
    base_adjacency: list[list[tuple[int, float]]] | None = None,
) -> RecourseGraph:
    """Build the neighborhood graph over the dataset plus the query point.

    ``base_adjacency`` (from :func:`dataset_adjacency`) lets callers reuse the
    dataset-to-dataset edges when querying many points of interest.
    """
    if distance_threshold <= 0:
        raise ConfigError(f"distance threshold must be > 0, got {distance_threshold}")
    poi = np.asarray(poi, dtype=float)
    pts = dataset.points
    if base_adjacency is None:
        base_adjacency = dataset_adjacency(pts, distance_threshold)
    adjacency = [list(neighbors) for neighbors in base_adjacency]
    poi_node = len(pts)
    adjacency.append([])
    if len(pts):
        poi_dists = np.sqrt(((pts - poi) ** 2).sum(axis=1))
        for v in np.flatnonzero(poi_dists < distance_threshold):
            w = float(poi_dists[v])
            adjacency[poi_node].append((int(v), w))
            adjacency[int(v)].append((poi_node, w))
    all_points = np.vstack([pts, poi[None, :]]) if len(pts) else poi[None, :]
    return RecourseGraph(
        points=all_points,
        adjacency=tuple(tuple(nbrs) for nbrs in adjacency),
        distance_threshold=distance_threshold,
        poi_node=poi_node,
    )


def shortest_paths_from(
    graph: RecourseGraph, source: int
) -> tuple[np.ndarray, np.ndarray]:
    """Dijkstra from one node: (distance, predecessor) arrays, inf/-1 if unreachable."""
    n = graph.n_nodes
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=int)
    dist[source] = 0.0
    done = np.zeros(n, dtype=bool)
    heap: list[tuple[float, int]] = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in graph.adjacency[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred


def _unwind(pred: np.ndarray, source: int, target: int) -> list[int]:
    nodes = [target]
    while nodes[-1] != source:
        nodes.append(int(pred[nodes[-1]]))
    nodes.reverse()
    return nodes


def face_paths(
    graph: RecourseGraph,
    model: Model,
    threshold: float = DEFAULT_THRESHOLD,
    k: int = 3,
    max_path_nodes: int = DEFAULT_MAX_PATH_NODES,
) -> list[RecoursePath]:
    """Shortest paths from the query node to its k nearest positive points.

    Candidates are positively classified dataset nodes, ordered by shortest
    path distance (ties by node index). Paths whose node count, including the
    query node, exceeds ``max_path_nodes`` are discarded. Fewer than k paths
    are returned when fewer candidates are reachable; an empty list means no
    recourse exists in the graph.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    dist, pred = shortest_paths_from(graph, graph.poi_node)
    dataset_points = graph.points[: graph.poi_node]
    if len(dataset_points) == 0:
        return []
    labels = classify_batch(model, dataset_points, threshold)
    candidates = [
        (float(dist[v]), int(v))
        for v in range(graph.poi_node)
        if labels[v] == 1 and np.isfinite(dist[v])
    ]
    candidates.sort()
    paths: list[RecoursePath] = []
    for _, target in candidates[:k]:
        nodes = _unwind(pred, graph.poi_node, target)
        if len(nodes) > max_path_nodes:
            continue
        points = tuple(graph.points[u] for u in nodes)
        paths.append(RecoursePath(points=points, cluster_id=len(paths), success=True))
    return paths
