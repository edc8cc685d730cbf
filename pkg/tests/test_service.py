import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from step_recourse.alpha import VolcanoAlpha
from step_recourse.clustering import Clustering
from step_recourse.data import RecourseDataset
from step_recourse.models import LogisticModel
from step_recourse.paths import PathConfig, generate_paths
from step_recourse.schema import FeatureSchema, FeatureSpec
from step_recourse.service import ServiceState, create_app

from .conftest import LOGIT_07


def explorer_state(snapshot_path=None) -> ServiceState:
    """1-D walk toward wealth >= 1, with an immutable and a categorical feature."""
    schema = FeatureSchema(
        features=(
            FeatureSpec("wealth", "continuous", "free", scale_mean=0.0, scale_std=1.0),
            FeatureSpec("age", "continuous", "immutable", scale_mean=0.0, scale_std=1.0),
            FeatureSpec("plan", "categorical", "free", categories=("basic", "gold")),
        )
    )
    # confidence >= 0.7 exactly when wealth >= 1; other features ignored
    model = LogisticModel(weights=np.array([10.0, 0.0, 0.0, 0.0]), bias=-10.0 + LOGIT_07)
    points = np.array(
        [
            [1.5, 30.0, 1.0, 0.0],
            [2.0, 30.0, 1.0, 0.0],
            [-0.5, 30.0, 1.0, 0.0],
        ]
    )
    labels = np.array([1, 1, -1])
    dataset = RecourseDataset(
        schema=schema, points=points, raw_ids=(0, 1, 2), labels=labels
    )
    clustering = Clustering(
        k=1, assignment={0: 0, 1: 0}, centroids=np.array([[1.75, 30.0, 1.0, 0.0]]), seed=0
    )
    return ServiceState(
        schema=schema,
        model=model,
        dataset=dataset,
        clustering=clustering,
        alpha=VolcanoAlpha(2.0, 0.5),
        threshold=0.7,
        step_size=1.0,
        snapshot_path=str(snapshot_path) if snapshot_path else None,
    )


POI = {"wealth": -0.5, "age": 30, "plan": "basic"}


@pytest.fixture
def client():
    with TestClient(create_app(explorer_state())) as c:
        yield c


class TestCreateSession:
    def test_valid_record_created_with_label_and_confidence(self, client):
        resp = client.post("/api/session", json=POI)
        assert resp.status_code == 201
        body = resp.json()
        assert body["label"] == -1
        assert 0.0 <= body["confidence"] < 0.7
        assert body["status"] == "seeking"
        assert body["id"]

    def test_already_positive_record_starts_succeeded(self, client):
        resp = client.post("/api/session", json={**POI, "wealth": 3.0})
        assert resp.status_code == 201
        assert resp.json()["status"] == "succeeded"

    def test_malformed_field_is_400(self, client):
        resp = client.post("/api/session", json={**POI, "wealth": "rich"})
        assert resp.status_code == 400
        assert "wealth" in resp.json()["error"]

    def test_missing_feature_is_400(self, client):
        resp = client.post("/api/session", json={"wealth": 1.0})
        assert resp.status_code == 400

    def test_unknown_category_is_422(self, client):
        resp = client.post("/api/session", json={**POI, "plan": "platinum"})
        assert resp.status_code == 422
        assert "platinum" in resp.json()["error"]


class TestDirections:
    def test_one_entry_per_cluster_with_decoded_deltas(self, client):
        session_id = client.post("/api/session", json=POI).json()["id"]
        resp = client.get(f"/api/session/{session_id}/directions")
        assert resp.status_code == 200
        directions = resp.json()["directions"]
        assert len(directions) == 1
        entry = directions[0]
        assert not entry["empty"]
        assert entry["deltas"]["wealth"]["delta"] == pytest.approx(1.0, abs=1e-9)
        assert entry["deltas"]["age"]["delta"] == 0.0  # immutable stays put
        assert 0.0 <= entry["next_confidence"] <= 1.0

    def test_unknown_session_404(self, client):
        assert client.get("/api/session/nope/directions").status_code == 404

    def test_after_success_409(self, client):
        session_id = client.post("/api/session", json={**POI, "wealth": 5.0}).json()["id"]
        assert client.get(f"/api/session/{session_id}/directions").status_code == 409


class TestSteps:
    def test_cluster_step_matches_path_engine_single_iteration(self, client):
        state = explorer_state()
        session_id = client.post("/api/session", json=POI).json()["id"]
        resp = client.post(f"/api/session/{session_id}/step", json={"cluster_id": 0})
        assert resp.status_code == 200
        stepped = resp.json()
        engine_paths = generate_paths(
            np.array([-0.5, 30.0, 1.0, 0.0]),
            state.dataset,
            state.clustering,
            state.model,
            state.alpha,
            PathConfig(),
        )
        assert stepped["features"]["wealth"] == pytest.approx(
            float(engine_paths[0].points[1][0])
        )

    def test_walk_to_success_and_replay_equals_engine(self, client):
        state = explorer_state()
        session_id = client.post("/api/session", json=POI).json()["id"]
        statuses = []
        for _ in range(10):
            resp = client.post(f"/api/session/{session_id}/step", json={"cluster_id": 0})
            if resp.status_code != 200:
                break
            statuses.append(resp.json()["status"])
            if resp.json()["status"] == "succeeded":
                break
        assert statuses[-1] == "succeeded"

        view = client.get(f"/api/session/{session_id}").json()
        engine_paths = generate_paths(
            np.array([-0.5, 30.0, 1.0, 0.0]),
            state.dataset,
            state.clustering,
            state.model,
            state.alpha,
            PathConfig(),
        )
        engine_points = engine_paths[0].points
        assert len(view["history"]) == len(engine_points)
        for record, point in zip(view["history"], engine_points):
            assert record["features"]["wealth"] == pytest.approx(float(point[0]))
            assert record["confidence"] == pytest.approx(
                float(state.model.confidence(point))
            )

    def test_history_grows_by_exactly_one_per_accepted_step(self, client):
        session_id = client.post("/api/session", json=POI).json()["id"]
        before = len(client.get(f"/api/session/{session_id}").json()["history"])
        client.post(f"/api/session/{session_id}/step", json={"cluster_id": 0})
        after = len(client.get(f"/api/session/{session_id}").json()["history"])
        assert after == before + 1
        # a rejected step must not grow history
        client.post(f"/api/session/{session_id}/step", json={"cluster_id": 99})
        assert len(client.get(f"/api/session/{session_id}").json()["history"]) == after

    def test_manual_delta_pathway(self, client):
        session_id = client.post("/api/session", json=POI).json()["id"]
        resp = client.post(
            f"/api/session/{session_id}/step",
            json={"manual_deltas": {"wealth": 0.25, "plan": "gold"}},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["features"]["wealth"] == pytest.approx(-0.25)
        assert body["features"]["plan"] == "gold"
        view = client.get(f"/api/session/{session_id}").json()
        assert view["history"][-1]["choice"] == "manual"

    def test_manual_delta_on_immutable_is_400_naming_feature(self, client):
        session_id = client.post("/api/session", json=POI).json()["id"]
        resp = client.post(
            f"/api/session/{session_id}/step", json={"manual_deltas": {"age": 5}}
        )
        assert resp.status_code == 400
        assert "age" in resp.json()["error"]

    def test_threshold_crossing_flips_status(self, client):
        session_id = client.post("/api/session", json={**POI, "wealth": 0.9}).json()["id"]
        resp = client.post(
            f"/api/session/{session_id}/step", json={"manual_deltas": {"wealth": 0.5}}
        )
        assert resp.json()["status"] == "succeeded"
        after = client.post(f"/api/session/{session_id}/step", json={"cluster_id": 0})
        assert after.status_code == 409

    def test_body_must_pick_exactly_one_variant(self, client):
        session_id = client.post("/api/session", json=POI).json()["id"]
        both = client.post(
            f"/api/session/{session_id}/step",
            json={"cluster_id": 0, "manual_deltas": {}},
        )
        neither = client.post(f"/api/session/{session_id}/step", json={})
        assert both.status_code == 400
        assert neither.status_code == 400


class TestMeta:
    def test_meta_exposes_schema_and_knobs(self, client):
        body = client.get("/api/meta").json()
        assert body["k"] == 1
        assert body["threshold"] == 0.7
        assert body["step_size"] == 1.0
        names = [f["name"] for f in body["schema"]["features"]]
        assert names == ["wealth", "age", "plan"]
        age = body["schema"]["features"][1]
        assert age["mutability"] == "immutable"


class TestSnapshot:
    def test_sessions_survive_restart_via_snapshot(self, tmp_path):
        snap = tmp_path / "sessions.json"
        state = explorer_state(snapshot_path=snap)
        with TestClient(create_app(state)) as client:
            session_id = client.post("/api/session", json=POI).json()["id"]
        assert snap.exists()
        revived = explorer_state(snapshot_path=snap)
        with TestClient(create_app(revived)) as client:
            view = client.get(f"/api/session/{session_id}")
            assert view.status_code == 200
            assert view.json()["features"]["wealth"] == pytest.approx(-0.5)
