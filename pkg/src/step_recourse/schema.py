"""Feature schema: kinds, mutability, encoding layout, and constraint projection.

Encoded space layout, in schema feature order:
  continuous  -> one dimension, z-scored with the schema's mean/std
  ordinal     -> one dimension, integer level position 1..k
  categorical -> one-hot block, one dimension per category

Mutability governs projection: ``immutable`` dimensions are restored to the
current point, ``increase_only`` dimensions are clamped from below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import SchemaError

KINDS = ("continuous", "ordinal", "categorical")
MUTABILITIES = ("free", "immutable", "increase_only")


@dataclass(frozen=True)
class FeatureSpec:
    """One feature: its kind, mutability, and (for continuous) scaling stats."""

    name: str
    kind: str
    mutability: str = "free"
    levels: tuple[str, ...] = ()      # ordinal only, ordered low -> high
    categories: tuple[str, ...] = ()  # categorical only
    scale_mean: float | None = None   # continuous only
    scale_std: float | None = None    # continuous only

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.mutability not in MUTABILITIES:
            raise SchemaError(
                f"feature {self.name!r}: unknown mutability {self.mutability!r}"
            )
        if self.kind == "ordinal":
            if len(self.levels) < 2:
                raise SchemaError(f"ordinal feature {self.name!r} needs >= 2 levels")
            if len(set(self.levels)) != len(self.levels):
                raise SchemaError(f"ordinal feature {self.name!r} has duplicate levels")
        if self.kind == "categorical":
            if len(self.categories) < 2:
                raise SchemaError(
                    f"categorical feature {self.name!r} needs >= 2 categories"
                )
            if len(set(self.categories)) != len(self.categories):
                raise SchemaError(
                    f"categorical feature {self.name!r} has duplicate categories"
                )
            if self.mutability == "increase_only":
                raise SchemaError(
                    f"categorical feature {self.name!r} cannot be increase_only"
                )
        if self.scale_std is not None and self.scale_std <= 0:
            raise SchemaError(f"feature {self.name!r}: scale_std must be > 0")

    @property
    def width(self) -> int:
        """Number of encoded dimensions this feature occupies."""
        return len(self.categories) if self.kind == "categorical" else 1


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature specs plus the target column description."""

    features: tuple[FeatureSpec, ...]
    target_name: str | None = None
    target_positive_value: str | None = None
    # Derived layout, filled in __post_init__.
    _offsets: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        offsets, cursor = [], 0
        for f in self.features:
            offsets.append(cursor)
            cursor += f.width
        object.__setattr__(self, "_offsets", tuple(offsets))

    @property
    def encoded_dim(self) -> int:
        return sum(f.width for f in self.features)

    def feature(self, name: str) -> FeatureSpec:
        for f in self.features:
            if f.name == name:
                return f
        raise SchemaError(f"unknown feature {name!r}")

    def span(self, name: str) -> tuple[int, int]:
        """Encoded [start, stop) dimensions of a feature."""
        for f, off in zip(self.features, self._offsets):
            if f.name == name:
                return off, off + f.width
        raise SchemaError(f"unknown feature {name!r}")

    def spans(self):
        """Yield (spec, start, stop) for every feature in order."""
        for f, off in zip(self.features, self._offsets):
            yield f, off, off + f.width

    def continuous_mask(self) -> np.ndarray:
        """Boolean mask over encoded dimensions that belong to continuous features."""
        mask = np.zeros(self.encoded_dim, dtype=bool)
        for f, start, stop in self.spans():
            if f.kind == "continuous":
                mask[start:stop] = True
        return mask

    def has_scaling_stats(self) -> bool:
        return all(
            f.scale_mean is not None and f.scale_std is not None
            for f in self.features
            if f.kind == "continuous"
        )

    def with_scaling_stats(self, stats: dict[str, tuple[float, float]]) -> "FeatureSchema":
        """Return a copy whose continuous features carry the given (mean, std)."""
        new_features = []
        for f in self.features:
            if f.kind == "continuous":
                if f.name not in stats:
                    raise SchemaError(f"no scaling stats for feature {f.name!r}")
                mean, std = stats[f.name]
                if std <= 0:
                    raise SchemaError(
                        f"feature {f.name!r} is constant (std = {std}); cannot scale"
                    )
                new_features.append(replace(f, scale_mean=float(mean), scale_std=float(std)))
            else:
                new_features.append(f)
        return FeatureSchema(
            features=tuple(new_features),
            target_name=self.target_name,
            target_positive_value=self.target_positive_value,
        )

    # -- raw <-> encoded ---------------------------------------------------

    def encode_value(self, spec: FeatureSpec, value) -> np.ndarray:
        if spec.kind == "continuous":
            if spec.scale_mean is None or spec.scale_std is None:
                raise SchemaError(f"feature {spec.name!r} has no scaling stats yet")
            return np.array([(float(value) - spec.scale_mean) / spec.scale_std])
        if spec.kind == "ordinal":
            sval = str(value)
            if sval not in spec.levels:
                raise SchemaError(
                    f"unknown level {sval!r} for ordinal feature {spec.name!r}"
                )
            return np.array([float(spec.levels.index(sval) + 1)])
        sval = str(value)
        if sval not in spec.categories:
            raise SchemaError(
                f"unknown category {sval!r} for feature {spec.name!r}"
            )
        block = np.zeros(len(spec.categories))
        block[spec.categories.index(sval)] = 1.0
        return block

    def encode_record(self, record: dict) -> np.ndarray:
        """Encode a raw feature-name -> value mapping into a point vector."""
        parts = []
        for f in self.features:
            if f.name not in record:
                raise SchemaError(f"record is missing feature {f.name!r}")
            parts.append(self.encode_value(f, record[f.name]))
        return np.concatenate(parts)

    def decode_point(self, point: np.ndarray) -> dict:
        """Decode an encoded point back to raw feature values."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.encoded_dim,):
            raise SchemaError(
                f"point has {point.shape} entries, expected ({self.encoded_dim},)"
            )
        record: dict = {}
        for f, start, stop in self.spans():
            block = point[start:stop]
            if f.kind == "continuous":
                record[f.name] = float(block[0] * f.scale_std + f.scale_mean)
            elif f.kind == "ordinal":
                idx = int(round(float(block[0]))) - 1
                if not 0 <= idx < len(f.levels):
                    raise SchemaError(
                        f"ordinal value {block[0]} out of range for {f.name!r}"
                    )
                record[f.name] = f.levels[idx]
            else:
                hot = np.flatnonzero(block == 1.0)
                if len(hot) != 1 or not np.isclose(block.sum(), 1.0):
                    raise SchemaError(f"invalid one-hot block for {f.name!r}: {block}")
                record[f.name] = f.categories[int(hot[0])]
        return record

    def is_valid_point(self, point: np.ndarray) -> bool:
        """Check encoding validity: finite, one-hot blocks exact, ordinals in range."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.encoded_dim,) or not np.all(np.isfinite(point)):
            return False
        for f, start, stop in self.spans():
            block = point[start:stop]
            if f.kind == "ordinal":
                val = float(block[0])
                if val != round(val) or not 1 <= val <= len(f.levels):
                    return False
            elif f.kind == "categorical":
                if not (np.all((block == 0.0) | (block == 1.0)) and block.sum() == 1.0):
                    return False
        return True


def project_constraints(
    current: np.ndarray, proposed: np.ndarray, schema: FeatureSchema
) -> np.ndarray:
    """Project a proposed point onto the set of valid, actionable points.

    Per feature: immutable dimensions are restored from ``current``;
    increase_only dimensions are clamped to >= current; ordinal dimensions are
    rounded to the nearest in-range level (halves round up); one-hot blocks are
    snapped to the indicator of their largest coordinate, keeping the current
    category on ties. Total and idempotent on valid ``current``.
    """
    current = np.asarray(current, dtype=float)
    proposed = np.asarray(proposed, dtype=float)
    out = proposed.copy()
    for f, start, stop in schema.spans():
        if f.mutability == "immutable":
            out[start:stop] = current[start:stop]
            continue
        if f.kind == "continuous":
            if f.mutability == "increase_only":
                out[start] = max(out[start], current[start])
        elif f.kind == "ordinal":
            level = np.floor(out[start] + 0.5)
            level = min(max(level, 1.0), float(len(f.levels)))
            if f.mutability == "increase_only":
                level = max(level, current[start])
            out[start] = level
        else:
            block = out[start:stop]
            top = block.max()
            tied = np.flatnonzero(block == top)
            current_idx = int(np.argmax(current[start:stop]))
            winner = current_idx if current_idx in tied else int(tied[0])
            out[start:stop] = 0.0
            out[start + winner] = 1.0
    return out


# -- JSON schema documents --------------------------------------------------


def schema_from_dict(doc: dict) -> FeatureSchema:
    if "features" not in doc:
        raise SchemaError("schema document has no 'features' list")
    features = []
    for item in doc["features"]:
        try:
            features.append(
                FeatureSpec(
                    name=item["name"],
                    kind=item["kind"],
                    mutability=item.get("mutability", "free"),
                    levels=tuple(item.get("levels", ())),
                    categories=tuple(item.get("categories", ())),
                    scale_mean=item.get("scale_mean"),
                    scale_std=item.get("scale_std"),
                )
            )
        except KeyError as exc:
            raise SchemaError(f"feature entry missing key {exc}") from exc
    target = doc.get("target", {})
    return FeatureSchema(
        features=tuple(features),
        target_name=target.get("name"),
        target_positive_value=target.get("positive_value"),
    )


def schema_to_dict(schema: FeatureSchema) -> dict:
    features = []
    for f in schema.features:
        item: dict = {"name": f.name, "kind": f.kind, "mutability": f.mutability}
        if f.kind == "ordinal":
            item["levels"] = list(f.levels)
        if f.kind == "categorical":
            item["categories"] = list(f.categories)
        if f.scale_mean is not None:
            item["scale_mean"] = f.scale_mean
        if f.scale_std is not None:
            item["scale_std"] = f.scale_std
        features.append(item)
    doc: dict = {"features": features}
    if schema.target_name is not None:
        doc["target"] = {
            "name": schema.target_name,
            "positive_value": schema.target_positive_value,
        }
    return doc


def load_schema(path: str | Path) -> FeatureSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return schema_from_dict(json.load(fh))
