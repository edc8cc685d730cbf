"""Pluggable binary classifiers: confidence in [0, 1], labels in {-1, +1}.

A model only has to expose :meth:`Model.confidence_batch`; everything else is
derived. Classification is threshold-inclusive: confidence >= threshold means
the positive class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ModelError

DEFAULT_THRESHOLD = 0.7


class Model:
    """Base classifier interface."""

    def confidence_batch(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def confidence(self, point: np.ndarray) -> float:
        return float(self.confidence_batch(np.asarray(point, dtype=float)[None, :])[0])

    def classify(self, point: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> int:
        return 1 if self.confidence(point) >= threshold else -1


def classify_batch(
    model: Model, points: np.ndarray, threshold: float = DEFAULT_THRESHOLD
) -> np.ndarray:
    """Label every row of ``points`` at the given threshold."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return np.zeros(0, dtype=int)
    conf = np.asarray(model.confidence_batch(points))
    return np.where(conf >= threshold, 1, -1).astype(int)


@dataclass(frozen=True, eq=False)
class LogisticModel(Model):
    """Linear model with sigmoid confidence."""

    weights: np.ndarray
    bias: float
    threshold: float = DEFAULT_THRESHOLD

    def confidence_batch(self, points: np.ndarray) -> np.ndarray:
        z = np.asarray(points, dtype=float) @ self.weights + self.bias
        return _sigmoid(z)

    def to_dict(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "threshold": float(self.threshold),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LogisticModel":
        try:
            return cls(
                weights=np.asarray(doc["weights"], dtype=float),
                bias=float(doc["bias"]),
                threshold=float(doc.get("threshold", DEFAULT_THRESHOLD)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"invalid model document: {exc}") from exc

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "LogisticModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class LookupModel(Model):
    """Classifier defined by a table over known points, constant elsewhere.

    Confidence is exactly 0 or 1. Points are matched bit-exactly, which is
    what the dataset-only dependence checks need: two lookup models that agree
    on the dataset but differ in ``default_label`` are indistinguishable to
    any computation that only queries dataset points.
    """

    def __init__(self, points: np.ndarray, labels, default_label: int = -1):
        points = np.asarray(points, dtype=float)
        labels = np.asarray(labels, dtype=int)
        if default_label not in (-1, 1):
            raise ModelError("default_label must be -1 or +1")
        if len(points) != len(labels) or not np.all(np.isin(labels, (-1, 1))):
            raise ModelError("points/labels mismatch or labels outside {-1, +1}")
        self.default_label = default_label
        self._table = {
            np.ascontiguousarray(p).tobytes(): int(l) for p, l in zip(points, labels)
        }

    def confidence_batch(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        out = np.empty(len(points))
        for i, p in enumerate(points):
            label = self._table.get(np.ascontiguousarray(p).tobytes(), self.default_label)
            out[i] = 1.0 if label == 1 else 0.0
        return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Split by sign to stay finite for large |z|.
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_grad(
    weights: np.ndarray,
    bias: float,
    features: np.ndarray,
    targets: np.ndarray,
    l2_penalty: float,
) -> tuple[float, np.ndarray, float]:
    """Mean log-loss with an L2 penalty on the weights, and its gradient.

    Returns (loss, d_loss/d_weights, d_loss/d_bias). The penalty is
    ``l2_penalty * ||w||^2 / 2`` and does not touch the bias.
    """
    z = features @ weights + bias
    p = _sigmoid(z)
    eps = 1e-12
    loss = float(
        -np.mean(targets * np.log(p + eps) + (1 - targets) * np.log(1 - p + eps))
        + 0.5 * l2_penalty * float(weights @ weights)
    )
    residual = p - targets
    grad_w = features.T @ residual / len(targets) + l2_penalty * weights
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def train_logistic(
    features: np.ndarray,
    targets: np.ndarray,
    epochs: int = 500,
    learning_rate: float = 0.5,
    l2_penalty: float = 1e-4,
    seed: int = 0,
) -> LogisticModel:
    """Fit a logistic model with full-batch gradient descent from zero weights.

    Deterministic: full-batch descent needs no sampling, so ``seed`` exists
    only to keep the trainer interface uniform. Duplicating every row leaves
    the mean loss, and hence the fitted model, unchanged.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if features.ndim != 2 or len(features) != len(targets):
        raise ModelError("features must be 2-D and aligned with targets")
    if len(features) < 2:
        raise ModelError("need at least 2 training rows")
    if not np.all(np.isfinite(features)):
        raise ModelError("features contain non-finite values")
    classes = set(np.unique(targets))
    if not classes <= {0.0, 1.0}:
        raise ModelError(f"targets must be in {{0, 1}}, got {sorted(classes)}")
    if len(classes) < 2:
        raise ModelError("training targets contain a single class")

    weights = np.zeros(features.shape[1])
    bias = 0.0
    for _ in range(epochs):
        _, grad_w, grad_b = logistic_loss_grad(weights, bias, features, targets, l2_penalty)
        weights = weights - learning_rate * grad_w
        bias = bias - learning_rate * grad_b
    return LogisticModel(weights=weights, bias=bias)
