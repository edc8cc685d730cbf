"""Direction-based algorithmic recourse from data and black-box predictions."""

from .alpha import (
    BoundedAlpha,
    SlopedAlpha,
    VolcanoAlpha,
    alpha_eval,
    bounded_alpha,
    default_alpha,
)
from .clustering import Clustering, kmeans_positive, random_clustering
from .data import RecourseDataset, load_dataset
from .errors import (
    ConfigError,
    DatasetError,
    ModelError,
    RecourseError,
    SchemaError,
    ZeroDirectionError,
)
from .face import RecourseGraph, build_graph, face_paths
from .harness import ExperimentConfig, perturb_direction, run_experiment, sweep_k, sweep_noise
from .metrics import (
    MetricsReport,
    avg_success,
    diversity,
    l2_distance,
    path_length,
    path_steps,
    per_poi_metrics,
    proximal_diversity,
    success,
)
from .models import LogisticModel, LookupModel, Model, classify_batch, train_logistic
from .paths import (
    Direction,
    PathConfig,
    RecoursePath,
    apply_step,
    generate_paths,
    step_direction,
)
from .privacy import PrivacyParams, compose_budget, privatize_direction, required_sigma
from .schema import FeatureSchema, FeatureSpec, load_schema, project_constraints

__version__ = "0.1.0"
