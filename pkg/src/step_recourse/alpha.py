"""Distance-weight functions used when aggregating pulls toward positive points.

A weight function maps a non-negative distance to a non-negative weight and is
non-increasing, so nearby points pull harder than faraway points. Two shapes
are provided: an inverse-power curve that is capped below a cutoff (``volcano``)
and a Gaussian-shaped curve (``sloped``). Both are continuous and bounded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "AlphaFunction",
    "VolcanoAlpha",
    "SlopedAlpha",
    "BoundedAlpha",
    "alpha_eval",
    "bounded_alpha",
    "default_alpha",
    "alpha_from_spec",
]


@dataclass(frozen=True)
class VolcanoAlpha:
    """Inverse-power weight ``z^-degree`` capped at ``cutoff^-degree`` for z <= cutoff."""

    degree: float = 2.0
    cutoff: float = 0.5

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ConfigError(f"volcano degree must be >= 0, got {self.degree}")
        if self.cutoff <= 0:
            raise ConfigError(f"volcano cutoff must be > 0, got {self.cutoff}")

    def __call__(self, z: np.ndarray | float) -> np.ndarray | float:
        # max(z, cutoff)^-degree is exactly the piecewise definition and
        # avoids evaluating z^-degree at z = 0.
        return np.maximum(z, self.cutoff) ** (-self.degree)


@dataclass(frozen=True)
class SlopedAlpha:
    """Gaussian-shaped weight ``exp(-(z/width)^2 / 2)`` with value 1 at z = 0."""

    width: float = 1.0

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ConfigError(f"sloped width must be > 0, got {self.width}")

    def __call__(self, z: np.ndarray | float) -> np.ndarray | float:
        return np.exp(-0.5 * (np.asarray(z, dtype=float) / self.width) ** 2)


@dataclass(frozen=True)
class BoundedAlpha:
    """``min(base(z), sensitivity_bound / z)``, the premise of the privacy bound.

    Capping by ``C / z`` bounds each point's pull vector to norm at most C,
    which is what makes the aggregated direction's sensitivity at most C.
    """

    base: "AlphaFunction"
    sensitivity_bound: float

    def __post_init__(self) -> None:
        if self.sensitivity_bound <= 0:
            raise ConfigError(
                f"sensitivity bound must be > 0, got {self.sensitivity_bound}"
            )

    def __call__(self, z: np.ndarray | float) -> np.ndarray | float:
        z_arr = np.asarray(z, dtype=float)
        base_val = np.asarray(self.base(z_arr), dtype=float)
        with np.errstate(divide="ignore"):
            cap = np.where(z_arr > 0, self.sensitivity_bound / np.maximum(z_arr, 1e-300), np.inf)
        result = np.minimum(base_val, cap)
        if np.isscalar(z) or np.ndim(z) == 0:
            return float(result)
        return result


# Anything callable on distances works; the dataclasses above are the built-ins.
AlphaFunction = VolcanoAlpha | SlopedAlpha | BoundedAlpha


def alpha_eval(alpha, z: float) -> float:
    """Evaluate a weight function at a single distance z >= 0."""
    if z < 0:
        raise ValueError(f"distance must be >= 0, got {z}")
    return float(alpha(np.asarray(z, dtype=float)))


def bounded_alpha(base, sensitivity_bound: float) -> BoundedAlpha:
    """Cap ``base`` pointwise by ``sensitivity_bound / z``."""
    return BoundedAlpha(base=base, sensitivity_bound=sensitivity_bound)


def default_alpha() -> VolcanoAlpha:
    """The default weight function: volcano with degree 2, cutoff 0.5."""
    return VolcanoAlpha(degree=2.0, cutoff=0.5)


def alpha_from_spec(spec: dict | None):
    """Build a weight function from a config mapping.

    ``{"kind": "volcano", "degree": 2, "cutoff": 0.5}`` or
    ``{"kind": "sloped", "width": 1.0}``; None selects the default.
    """
    if spec is None:
        return default_alpha()
    kind = spec.get("kind", "volcano")
    if kind == "volcano":
        return VolcanoAlpha(
            degree=float(spec.get("degree", 2.0)),
            cutoff=float(spec.get("cutoff", 0.5)),
        )
    if kind == "sloped":
        return SlopedAlpha(width=float(spec.get("width", 1.0)))
    raise ConfigError(f"unknown alpha kind: {kind!r}")
