"""Differential privacy for recourse directions via the Gaussian mechanism.

When the distance weight satisfies ``alpha(z) <= C / z`` (enforced with
:func:`step_recourse.alpha.bounded_alpha`), adding or removing one datapoint
moves the direction by at most C in the l2 norm: a removed negative point
contributes nothing, and a removed positive point's entire contribution is
the vector ``(x' - x) * alpha(||x' - x||)`` whose norm is capped at C. Gaussian
noise calibrated to that sensitivity then gives an (epsilon, delta) guarantee,
composing additively over k offered directions.

Two noise calibrations ship. The ``standard`` mode uses the usual
``sigma = sqrt(2 ln(1.25 / delta)) * C / epsilon``. The ``paper_literal`` mode
instead scales with C squared; it exists only for comparison, since the
sensitivity bound itself is linear in C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .paths import Direction

PRIVACY_MODES = ("standard", "paper_literal")


def required_sigma(epsilon: float, delta: float, sensitivity: float) -> float:
    """Gaussian-mechanism noise scale for a given l2 sensitivity."""
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    if not 0 < delta < 1:
        raise ConfigError(f"delta must be in (0, 1), got {delta}")
    if sensitivity < 0:
        raise ConfigError(f"sensitivity must be >= 0, got {sensitivity}")
    return math.sqrt(2.0 * math.log(1.25 / delta)) * sensitivity / epsilon


def paper_literal_sigma(epsilon: float, delta: float, sensitivity_bound: float) -> float:
    """Comparison-only calibration that scales with the square of the bound."""
    return required_sigma(epsilon, delta, sensitivity_bound) * sensitivity_bound


@dataclass(frozen=True)
class PrivacyParams:
    """Budget, sensitivity bound, and noise mode for private directions.

    ``sensitivity_bound`` is the C in the weight cap ``alpha(z) <= C / z``.
    Privacy holds for the un-clustered direction only; with k > 1 clusters the
    clustering itself is unaccounted for, so the engine refuses unless
    ``allow_with_clustering`` is set explicitly.
    """

    epsilon: float
    delta: float
    sensitivity_bound: float
    seed: int = 0
    mode: str = "standard"
    allow_with_clustering: bool = False

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if self.sensitivity_bound <= 0:
            raise ConfigError(
                f"sensitivity bound must be > 0, got {self.sensitivity_bound}"
            )
        if self.mode not in PRIVACY_MODES:
            raise ConfigError(f"privacy mode must be one of {PRIVACY_MODES}")

    @property
    def sigma(self) -> float:
        if self.mode == "paper_literal":
            return paper_literal_sigma(self.epsilon, self.delta, self.sensitivity_bound)
        return required_sigma(self.epsilon, self.delta, self.sensitivity_bound)

    @classmethod
    def from_dict(cls, doc: dict) -> "PrivacyParams":
        try:
            return cls(
                epsilon=float(doc["epsilon"]),
                delta=float(doc["delta"]),
                sensitivity_bound=float(doc["C"]),
                seed=int(doc.get("seed", 0)),
                mode=doc.get("mode", "standard"),
                allow_with_clustering=bool(doc.get("allow_with_clustering", False)),
            )
        except KeyError as exc:
            raise ConfigError(f"privacy config missing key {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "C": self.sensitivity_bound,
            "seed": self.seed,
            "mode": self.mode,
            "allow_with_clustering": self.allow_with_clustering,
        }


def privatize_direction(direction: Direction, sigma: float, seed: int) -> Direction:
    """Add seeded Gaussian(0, sigma^2) noise to every coordinate."""
    if sigma < 0:
        raise ConfigError(f"sigma must be >= 0, got {sigma}")
    vector = np.asarray(direction.vector, dtype=float)
    if sigma > 0:
        rng = np.random.default_rng(seed)
        vector = vector + rng.normal(0.0, sigma, size=vector.shape)
    return replace(direction, vector=vector, privatized=True)


def compose_budget(per_direction: tuple[float, float], k: int) -> tuple[float, float]:
    """Basic composition over k directions: budgets add."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    epsilon, delta = per_direction
    return (k * epsilon, k * delta)
