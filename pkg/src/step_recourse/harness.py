"""Experiment orchestration: trials, noise injection, sweeps.

Each trial is seeded independently from (config seed, trial index), so trial
results do not depend on how many trials run or in what order. A trial
shuffles and splits the data 70/15/15, fits scaling stats on the training
split (unless the schema document already carries them), trains or loads the
model, relabels everything through the model, clusters the positive training
rows, and then generates and scores recourse paths for the negatively
classified test rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .alpha import alpha_from_spec
from .clustering import Clustering, kmeans_positive, random_clustering
from .data import (
    RawTable,
    RecourseDataset,
    binary_targets,
    encode_table,
    fit_scaling_stats,
    read_table,
)
from .errors import ConfigError, DatasetError
from .face import build_graph, dataset_adjacency, face_paths
from .metrics import MetricsReport, aggregate_metrics, per_poi_metrics
from .models import LogisticModel, Model, classify_batch, train_logistic
from .paths import Direction, PathConfig, generate_paths
from .privacy import PrivacyParams
from .schema import FeatureSchema, load_schema


@dataclass(frozen=True)
class ModelSpec:
    """Train a logistic model per trial, or load fixed weights from a file."""

    kind: str = "train"  # "train" | "load"
    path: str | None = None
    epochs: int = 500
    learning_rate: float = 0.5
    l2_penalty: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("train", "load"):
            raise ConfigError(f"model kind must be 'train' or 'load', got {self.kind!r}")
        if self.kind == "load" and not self.path:
            raise ConfigError("model kind 'load' needs a path")


@dataclass(frozen=True)
class FaceConfig:
    distance_threshold: float = 3.0
    max_path_nodes: int = 50


@dataclass(frozen=True)
class ExperimentConfig:
    csv: str = ""
    schema: str = ""
    model: ModelSpec = field(default_factory=ModelSpec)
    method: str = "step"  # "step" | "face"
    k: int = 3
    trials: int = 10
    threshold: float = 0.7
    step_size: float = 1.0
    max_iterations: int = 50
    alpha: dict | None = None
    noise_beta: float = 0.0
    clustering: str = "kmeans"  # "kmeans" | "random"
    privacy: PrivacyParams | None = None
    seed: int = 0
    poi_cap: int = 1000
    face: FaceConfig = field(default_factory=FaceConfig)
    split: tuple[float, float, float] = (0.7, 0.15, 0.15)
    kmeans_max_iters: int = 100
    kmeans_restarts: int = 4

    def __post_init__(self) -> None:
        if self.method not in ("step", "face"):
            raise ConfigError(f"method must be 'step' or 'face', got {self.method!r}")
        if self.clustering not in ("kmeans", "random"):
            raise ConfigError(
                f"clustering must be 'kmeans' or 'random', got {self.clustering!r}"
            )
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0 < self.threshold < 1:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.noise_beta < 0:
            raise ConfigError(f"noise_beta must be >= 0, got {self.noise_beta}")
        if self.poi_cap < 1:
            raise ConfigError(f"poi_cap must be >= 1, got {self.poi_cap}")
        if len(self.split) != 3 or abs(sum(self.split) - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must sum to 1, got {self.split}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        model = ModelSpec(**doc["model"]) if "model" in doc else ModelSpec()
        face = FaceConfig(**doc["face"]) if "face" in doc else FaceConfig()
        privacy = (
            PrivacyParams.from_dict(doc["privacy"]) if doc.get("privacy") else None
        )
        known = {
            k: doc[k]
            for k in (
                "csv",
                "schema",
                "method",
                "k",
                "trials",
                "threshold",
                "step_size",
                "max_iterations",
                "alpha",
                "noise_beta",
                "clustering",
                "seed",
                "poi_cap",
                "kmeans_max_iters",
                "kmeans_restarts",
            )
            if k in doc
        }
        if "split" in doc:
            known["split"] = tuple(doc["split"])
        return cls(model=model, face=face, privacy=privacy, **known)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "csv": self.csv,
            "schema": self.schema,
            "model": {
                "kind": self.model.kind,
                "path": self.model.path,
                "epochs": self.model.epochs,
                "learning_rate": self.model.learning_rate,
                "l2_penalty": self.model.l2_penalty,
                "seed": self.model.seed,
            },
            "method": self.method,
            "k": self.k,
            "trials": self.trials,
            "threshold": self.threshold,
            "step_size": self.step_size,
            "max_iterations": self.max_iterations,
            "alpha": self.alpha,
            "noise_beta": self.noise_beta,
            "clustering": self.clustering,
            "privacy": self.privacy.to_dict() if self.privacy else None,
            "seed": self.seed,
            "poi_cap": self.poi_cap,
            "face": {
                "distance_threshold": self.face.distance_threshold,
                "max_path_nodes": self.face.max_path_nodes,
            },
            "split": list(self.split),
            "kmeans_max_iters": self.kmeans_max_iters,
            "kmeans_restarts": self.kmeans_restarts,
        }


def _trial_seed(seed: int, trial: int, purpose: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(trial), int(purpose)])


def perturb_direction(
    direction: Direction, beta: float, schema: FeatureSchema, seed: int
) -> Direction:
    """Add user-interference noise scaled to ``beta`` times the direction norm.

    Noise is standard normal on continuous dimensions and zero elsewhere,
    rescaled to magnitude beta * ||direction||. beta = 0, an all-categorical
    schema, or a zero direction leave the direction unchanged.
    """
    if beta < 0:
        raise ConfigError(f"beta must be >= 0, got {beta}")
    rng = np.random.default_rng(seed)
    return _perturb_with_rng(direction, beta, schema.continuous_mask(), rng)


def _perturb_with_rng(
    direction: Direction, beta: float, continuous_mask: np.ndarray, rng
) -> Direction:
    if beta == 0.0 or not continuous_mask.any():
        return direction
    vector = np.asarray(direction.vector, dtype=float)
    magnitude = beta * float(np.linalg.norm(vector))
    noise = np.zeros_like(vector)
    noise[continuous_mask] = rng.standard_normal(int(continuous_mask.sum()))
    noise_norm = float(np.linalg.norm(noise))
    if magnitude == 0.0 or noise_norm == 0.0:
        return direction
    return replace(direction, vector=vector + noise * (magnitude / noise_norm))


@dataclass(frozen=True)
class TrialPipeline:
    """Everything one trial needs to answer recourse queries."""

    schema: FeatureSchema
    model: Model
    train_dataset: RecourseDataset
    clustering: Clustering
    test_points: np.ndarray
    test_ids: tuple[int, ...]


def _split_indices(
    n: int, fractions: tuple[float, float, float], rng: np.random.Generator
):
    perm = rng.permutation(n)
    n_train = int(fractions[0] * n)
    n_val = int(fractions[1] * n)
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def build_trial_pipeline(
    config: ExperimentConfig, table: RawTable, schema: FeatureSchema, trial: int
) -> TrialPipeline:
    """Split, scale, train/load, relabel, and cluster for one trial."""
    rng = np.random.default_rng(_trial_seed(config.seed, trial, 0))
    train_idx, _val_idx, test_idx = _split_indices(len(table.records), config.split, rng)
    if len(train_idx) < 2 or len(test_idx) < 1:
        raise DatasetError(f"dataset too small to split: {len(table.records)} rows")

    train_table = RawTable(
        records=tuple(table.records[i] for i in train_idx),
        ids=tuple(table.ids[i] for i in train_idx),
        targets=tuple(table.targets[i] for i in train_idx) if table.targets else None,
        dropped_rows=0,
    )
    trial_schema = (
        schema if schema.has_scaling_stats() else fit_scaling_stats(train_table, schema)
    )
    train_points = encode_table(train_table, trial_schema)

    if config.model.kind == "train":
        targets = binary_targets(train_table, trial_schema)
        model: Model = train_logistic(
            train_points,
            targets,
            epochs=config.model.epochs,
            learning_rate=config.model.learning_rate,
            l2_penalty=config.model.l2_penalty,
            seed=config.model.seed,
        )
    else:
        model = LogisticModel.load(config.model.path)

    labels = classify_batch(model, train_points, config.threshold)
    train_dataset = RecourseDataset(
        schema=trial_schema,
        points=train_points,
        raw_ids=train_table.ids,
        labels=labels,
    )

    cluster_seed = int(_trial_seed(config.seed, trial, 1).generate_state(1)[0])
    if config.clustering == "kmeans":
        clustering = kmeans_positive(
            train_dataset,
            config.k,
            seed=cluster_seed,
            max_iters=config.kmeans_max_iters,
            restarts=config.kmeans_restarts,
        )
    else:
        clustering = random_clustering(train_dataset, config.k, seed=cluster_seed)
    train_dataset = train_dataset.with_cluster_of(
        clustering.cluster_of_array(train_dataset.n)
    )

    test_table = RawTable(
        records=tuple(table.records[i] for i in test_idx),
        ids=tuple(table.ids[i] for i in test_idx),
        targets=None,
        dropped_rows=0,
    )
    test_points = encode_table(test_table, trial_schema)
    return TrialPipeline(
        schema=trial_schema,
        model=model,
        train_dataset=train_dataset,
        clustering=clustering,
        test_points=test_points,
        test_ids=test_table.ids,
    )


def run_trial(config: ExperimentConfig, table: RawTable, schema: FeatureSchema, trial: int) -> list[dict]:
    """Score every negatively classified test point of one trial."""
    pipeline = build_trial_pipeline(config, table, schema, trial)
    alpha = alpha_from_spec(config.alpha)
    path_config = PathConfig(
        step_size=config.step_size,
        max_iterations=config.max_iterations,
        threshold=config.threshold,
        privacy=config.privacy,
    )
    test_labels = classify_batch(pipeline.model, pipeline.test_points, config.threshold)
    negative_positions = np.flatnonzero(test_labels == -1)[: config.poi_cap]
    if len(negative_positions) == 0:
        raise DatasetError(f"trial {trial}: no negatively classified test points")

    continuous_mask = pipeline.schema.continuous_mask()
    base_adjacency = None
    if config.method == "face":
        base_adjacency = dataset_adjacency(
            pipeline.train_dataset.points, config.face.distance_threshold
        )

    rows: list[dict] = []
    for poi_pos in negative_positions:
        poi = pipeline.test_points[poi_pos]
        if config.method == "step":
            hook = None
            if config.noise_beta > 0:
                noise_rng = np.random.default_rng(
                    np.random.SeedSequence(
                        [int(config.seed), int(trial), 2, int(poi_pos)]
                    )
                )
                hook = lambda d, r=noise_rng: _perturb_with_rng(
                    d, config.noise_beta, continuous_mask, r
                )
            paths = generate_paths(
                poi,
                pipeline.train_dataset,
                pipeline.clustering,
                pipeline.model,
                alpha,
                path_config,
                direction_hook=hook,
            )
        else:
            graph = build_graph(
                pipeline.train_dataset,
                poi,
                config.face.distance_threshold,
                base_adjacency=base_adjacency,
            )
            paths = face_paths(
                graph,
                pipeline.model,
                threshold=config.threshold,
                k=config.k,
                max_path_nodes=config.face.max_path_nodes,
            )
            if not paths:
                # Total failure still yields one scoreable, unsuccessful path.
                from .paths import RecoursePath

                paths = [RecoursePath(points=(poi,), cluster_id=0, success=False)]
        rows.append(
            {
                "trial": trial,
                "poi_id": int(pipeline.test_ids[poi_pos]),
                "metrics": per_poi_metrics(poi, paths),
            }
        )
    return rows


def run_experiment(config: ExperimentConfig) -> MetricsReport:
    """Run all trials and aggregate; deterministic for a fixed config seed."""
    schema = load_schema(config.schema)
    table = read_table(config.csv, schema)
    rows: list[dict] = []
    for trial in range(config.trials):
        rows.extend(run_trial(config, table, schema, trial))
    return aggregate_metrics(rows, trials=config.trials)


def sweep_noise(config: ExperimentConfig, betas: list[float]) -> list[tuple[float, MetricsReport]]:
    """One full experiment per user-interference noise level."""
    return [(b, run_experiment(replace(config, noise_beta=b))) for b in betas]


def sweep_k(config: ExperimentConfig, ks: list[int]) -> list[tuple[int, MetricsReport]]:
    """One full experiment per cluster count."""
    return [(k, run_experiment(replace(config, k=k))) for k in ks]


def write_report(report: MetricsReport, config: ExperimentConfig, out_path: str | Path) -> None:
    """Write the JSON report (config echo included) to ``out_path``."""
    doc = {"config": config.to_dict(), **report.to_dict()}
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
