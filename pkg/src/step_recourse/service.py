"""Interactive recourse service: sessions over the direction/step primitives.

The server is a thin stateful wrapper: a session holds the current point and
an append-only history, and every mutation goes through the same pure
direction/step functions the batch harness uses, so a session replays exactly.
Sessions live in memory, with an optional JSON snapshot written on shutdown
and reloaded on startup.

Directions are decoded into raw feature units before leaving the server:
continuous deltas are in the feature's original units, ordinal deltas count
level positions, and categorical entries report the from/to categories with a
0/1 change flag. Immutable features always show a zero delta because the
projection restores them before anything is reported.

Error responses are ``{"error": message}``: 400 for schema violations and
manual edits of immutable features, 422 for unknown category or level values,
404 for unknown sessions, 409 for acting on an already-successful session.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .alpha import alpha_from_spec
from .clustering import Clustering
from .data import RecourseDataset, read_table
from .errors import SchemaError
from .harness import ExperimentConfig, build_trial_pipeline
from .models import Model
from .paths import apply_step, step_direction
from .schema import FeatureSchema, project_constraints, schema_to_dict


class ServiceError(Exception):
    def __init__(self, status_code: int, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.message = message


@dataclass
class Session:
    id: str
    current: np.ndarray
    history: list[dict] = field(default_factory=list)
    status: str = "seeking"  # "seeking" | "succeeded"
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def to_dict(self) -> dict:
        return {
            "current": [float(v) for v in self.current],
            "history": self.history,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, session_id: str, doc: dict) -> "Session":
        return cls(
            id=session_id,
            current=np.asarray(doc["current"], dtype=float),
            history=list(doc["history"]),
            status=doc["status"],
        )


@dataclass
class ServiceState:
    schema: FeatureSchema
    model: Model
    dataset: RecourseDataset
    clustering: Clustering
    alpha: object
    threshold: float = 0.7
    step_size: float = 1.0
    snapshot_path: str | None = None
    sessions: dict[str, Session] = field(default_factory=dict)

    def cluster_positives(self, cluster_id: int) -> np.ndarray:
        return self.clustering.cluster_points(self.dataset, cluster_id)


def build_service_state(
    config: ExperimentConfig, snapshot_path: str | None = None
) -> ServiceState:
    """Load data, fit/train once (trial 0 seeding), and assemble the state."""
    from .schema import load_schema

    schema = load_schema(config.schema)
    table = read_table(config.csv, schema)
    pipeline = build_trial_pipeline(config, table, schema, trial=0)
    return ServiceState(
        schema=pipeline.schema,
        model=pipeline.model,
        dataset=pipeline.train_dataset,
        clustering=pipeline.clustering,
        alpha=alpha_from_spec(config.alpha),
        threshold=config.threshold,
        step_size=config.step_size,
        snapshot_path=snapshot_path,
    )


def _encode_record_checked(state: ServiceState, record) -> np.ndarray:
    if not isinstance(record, dict):
        raise ServiceError(400, "request body must be a feature map")
    for f in state.schema.features:
        if f.name not in record:
            raise ServiceError(400, f"missing feature {f.name!r}")
        value = record[f.name]
        if f.kind == "continuous":
            try:
                float(value)
            except (TypeError, ValueError):
                raise ServiceError(
                    400, f"feature {f.name!r} must be numeric, got {value!r}"
                )
        elif f.kind == "ordinal":
            if str(value) not in f.levels:
                raise ServiceError(
                    422, f"unknown level {value!r} for feature {f.name!r}"
                )
        else:
            if str(value) not in f.categories:
                raise ServiceError(
                    422, f"unknown category {value!r} for feature {f.name!r}"
                )
    extra = set(record) - {f.name for f in state.schema.features}
    if extra:
        raise ServiceError(400, f"unknown features: {sorted(extra)}")
    try:
        return state.schema.encode_record(record)
    except SchemaError as exc:
        raise ServiceError(400, str(exc))


def _classification(state: ServiceState, point: np.ndarray) -> tuple[int, float]:
    confidence = state.model.confidence(point)
    label = 1 if confidence >= state.threshold else -1
    return label, confidence


def _feature_deltas(state: ServiceState, current: np.ndarray, nxt: np.ndarray) -> dict:
    """Per-feature raw-unit changes between two encoded points."""
    schema = state.schema
    raw_from = schema.decode_point(current)
    raw_to = schema.decode_point(nxt)
    deltas: dict = {}
    for f in schema.features:
        entry: dict = {"from": raw_from[f.name], "to": raw_to[f.name]}
        if f.kind == "continuous":
            entry["delta"] = float(raw_to[f.name]) - float(raw_from[f.name])
        elif f.kind == "ordinal":
            entry["delta"] = float(
                f.levels.index(raw_to[f.name]) - f.levels.index(raw_from[f.name])
            )
        else:
            entry["delta"] = 0.0 if raw_from[f.name] == raw_to[f.name] else 1.0
        deltas[f.name] = entry
    return deltas


def _direction_payload(state: ServiceState, session: Session) -> list[dict]:
    payload = []
    for c in range(state.clustering.k):
        direction = step_direction(
            session.current,
            state.cluster_positives(c),
            state.model,
            state.alpha,
            state.threshold,
            cluster_id=c,
        )
        empty = float(np.linalg.norm(direction.vector)) == 0.0
        entry: dict = {
            "cluster": c,
            "empty": empty,
            "vector": [float(v) for v in direction.vector],
        }
        if not empty:
            nxt = apply_step(session.current, direction, state.schema, state.step_size)
            label, confidence = _classification(state, nxt)
            entry["deltas"] = _feature_deltas(state, session.current, nxt)
            entry["next_confidence"] = confidence
            entry["next_label"] = label
        else:
            entry["deltas"] = {}
        payload.append(entry)
    return payload


def _apply_manual(state: ServiceState, session: Session, deltas) -> np.ndarray:
    if not isinstance(deltas, dict):
        raise ServiceError(400, "manual_deltas must be a feature map")
    schema = state.schema
    known = {f.name for f in schema.features}
    unknown = set(deltas) - known
    if unknown:
        raise ServiceError(400, f"unknown features in manual_deltas: {sorted(unknown)}")
    raw = schema.decode_point(session.current)
    for f in schema.features:
        if f.name not in deltas:
            continue
        delta = deltas[f.name]
        if f.kind == "continuous":
            try:
                delta = float(delta)
            except (TypeError, ValueError):
                raise ServiceError(400, f"delta for {f.name!r} must be numeric")
            if f.mutability == "immutable" and delta != 0.0:
                raise ServiceError(
                    400, f"feature {f.name!r} is immutable and cannot be changed"
                )
            raw[f.name] = float(raw[f.name]) + delta
        elif f.kind == "ordinal":
            try:
                shift = int(delta)
            except (TypeError, ValueError):
                raise ServiceError(400, f"delta for {f.name!r} must be an integer")
            if f.mutability == "immutable" and shift != 0:
                raise ServiceError(
                    400, f"feature {f.name!r} is immutable and cannot be changed"
                )
            idx = f.levels.index(raw[f.name]) + shift
            idx = min(max(idx, 0), len(f.levels) - 1)
            raw[f.name] = f.levels[idx]
        else:
            target = str(delta)
            if target not in f.categories:
                raise ServiceError(
                    422, f"unknown category {delta!r} for feature {f.name!r}"
                )
            if f.mutability == "immutable" and target != raw[f.name]:
                raise ServiceError(
                    400, f"feature {f.name!r} is immutable and cannot be changed"
                )
            raw[f.name] = target
    proposed = schema.encode_record(raw)
    return project_constraints(session.current, proposed, schema)


def create_app(state: ServiceState) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        _load_snapshot(state)
        yield
        _write_snapshot(state)

    app = FastAPI(title="step-recourse explorer service", lifespan=lifespan)

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code, content={"error": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    def get_session(session_id: str) -> Session:
        session = state.sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"unknown session {session_id!r}")
        return session

    def session_view(session: Session) -> dict:
        label, confidence = _classification(state, session.current)
        return {
            "id": session.id,
            "status": session.status,
            "label": label,
            "confidence": confidence,
            "features": state.schema.decode_point(session.current),
            "history": [
                {
                    "features": state.schema.decode_point(np.asarray(h["point"])),
                    "confidence": h["confidence"],
                    "choice": h["choice"],
                }
                for h in session.history
            ],
        }

    @app.get("/api/meta")
    def meta() -> dict:
        doc = schema_to_dict(state.schema)
        doc.pop("target", None)
        return {
            "schema": doc,
            "k": state.clustering.k,
            "threshold": state.threshold,
            "step_size": state.step_size,
        }

    @app.post("/api/session", status_code=201)
    async def create_session(request: Request) -> dict:
        try:
            record = await request.json()
        except Exception:
            raise ServiceError(400, "request body must be JSON")
        point = _encode_record_checked(state, record)
        label, confidence = _classification(state, point)
        session = Session(
            id=uuid.uuid4().hex,
            current=point,
            status="succeeded" if label == 1 else "seeking",
        )
        session.history.append(
            {
                "point": [float(v) for v in point],
                "choice": "initial",
                "confidence": confidence,
            }
        )
        state.sessions[session.id] = session
        return {
            "id": session.id,
            "label": label,
            "confidence": confidence,
            "status": session.status,
        }

    @app.get("/api/session/{session_id}")
    def get_session_view(session_id: str) -> dict:
        return session_view(get_session(session_id))

    @app.get("/api/session/{session_id}/directions")
    def get_directions(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            if session.status == "succeeded":
                raise ServiceError(409, "session already succeeded")
            return {"directions": _direction_payload(state, session)}

    @app.post("/api/session/{session_id}/step")
    async def apply_user_step(session_id: str, request: Request) -> dict:
        session = get_session(session_id)
        try:
            body = await request.json()
        except Exception:
            raise ServiceError(400, "request body must be JSON")
        if not isinstance(body, dict):
            raise ServiceError(400, "request body must be an object")
        with session.lock:
            if session.status == "succeeded":
                raise ServiceError(409, "session already succeeded")
            if ("cluster_id" in body) == ("manual_deltas" in body):
                raise ServiceError(
                    400, "provide exactly one of cluster_id or manual_deltas"
                )
            if "cluster_id" in body:
                cluster_id = body["cluster_id"]
                if not isinstance(cluster_id, int) or not 0 <= cluster_id < state.clustering.k:
                    raise ServiceError(
                        400,
                        f"cluster_id must be an integer in [0, {state.clustering.k})",
                    )
                direction = step_direction(
                    session.current,
                    state.cluster_positives(cluster_id),
                    state.model,
                    state.alpha,
                    state.threshold,
                    cluster_id=cluster_id,
                )
                if float(np.linalg.norm(direction.vector)) == 0.0:
                    raise ServiceError(
                        400, f"cluster {cluster_id} offers no recourse direction"
                    )
                new_point = apply_step(
                    session.current, direction, state.schema, state.step_size
                )
                choice: object = cluster_id
            else:
                new_point = _apply_manual(state, session, body["manual_deltas"])
                choice = "manual"
            label, confidence = _classification(state, new_point)
            session.current = new_point
            session.history.append(
                {
                    "point": [float(v) for v in new_point],
                    "choice": choice,
                    "confidence": confidence,
                }
            )
            if label == 1:
                session.status = "succeeded"
            return {
                "features": state.schema.decode_point(new_point),
                "label": label,
                "confidence": confidence,
                "status": session.status,
            }

    return app


def _write_snapshot(state: ServiceState) -> None:
    if not state.snapshot_path:
        return
    doc = {sid: s.to_dict() for sid, s in state.sessions.items()}
    Path(state.snapshot_path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _load_snapshot(state: ServiceState) -> None:
    if not state.snapshot_path or not Path(state.snapshot_path).exists():
        return
    doc = json.loads(Path(state.snapshot_path).read_text(encoding="utf-8"))
    for sid, session_doc in doc.items():
        state.sessions[sid] = Session.from_dict(sid, session_doc)
