import numpy as np
import pytest

from step_recourse.errors import ModelError
from step_recourse.models import (
    LogisticModel,
    LookupModel,
    classify_batch,
    logistic_loss_grad,
    train_logistic,
)


def two_blobs(n=100, margin=1.0, seed=0):
    """Linearly separable blobs along the first axis with the given margin."""
    rng = np.random.default_rng(seed)
    half = n // 2
    neg = rng.uniform(-3.0, -margin / 2, size=(half, 2))
    pos = rng.uniform(margin / 2, 3.0, size=(n - half, 2))
    features = np.vstack([neg, pos])
    targets = np.concatenate([np.zeros(half), np.ones(n - half)])
    return features, targets


class TestTraining:
    def test_separable_blobs_reach_perfect_training_accuracy(self):
        # oracle: a converged linear separator classifies separable blobs
        # perfectly; verify by sweeping predictions over every training row
        features, targets = two_blobs(n=100, margin=1.0)
        model = train_logistic(features, targets, epochs=2000, learning_rate=0.5)
        predictions = classify_batch(model, features, threshold=0.5)
        expected = np.where(targets == 1.0, 1, -1)
        assert np.array_equal(predictions, expected)

    def test_zero_epochs_means_half_confidence_everywhere(self):
        features, targets = two_blobs(n=20)
        model = train_logistic(features, targets, epochs=0)
        conf = model.confidence_batch(features)
        assert np.all(conf == 0.5)

    def test_duplicated_rows_leave_decision_function_unchanged(self):
        # oracle: the mean-loss gradient of the duplicated dataset equals the
        # original gradient, so descent sees the identical loss surface
        features, targets = two_blobs(n=40, seed=1)
        dup_features = np.vstack([features, features])
        dup_targets = np.concatenate([targets, targets])
        w = np.array([0.3, -0.2])
        _, gw_orig, gb_orig = logistic_loss_grad(w, 0.1, features, targets, 0.0)
        _, gw_dup, gb_dup = logistic_loss_grad(w, 0.1, dup_features, dup_targets, 0.0)
        assert gw_dup == pytest.approx(gw_orig, abs=1e-12)
        assert gb_dup == pytest.approx(gb_orig, abs=1e-12)

        # the halved-rate, doubled-epoch run converges to the same optimum
        base = train_logistic(features, targets, epochs=1500, learning_rate=0.5, l2_penalty=0.1)
        dup = train_logistic(
            dup_features, dup_targets, epochs=3000, learning_rate=0.25, l2_penalty=0.1
        )
        assert dup.weights == pytest.approx(base.weights, abs=1e-9)
        assert dup.bias == pytest.approx(base.bias, abs=1e-9)

    def test_single_class_targets_rejected(self):
        with pytest.raises(ModelError, match="single class"):
            train_logistic(np.zeros((4, 2)), np.ones(4))

    def test_non_finite_features_rejected(self):
        features = np.array([[1.0, np.nan], [0.0, 1.0]])
        with pytest.raises(ModelError, match="non-finite"):
            train_logistic(features, np.array([0.0, 1.0]))

    def test_gradient_matches_central_finite_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n, m = int(rng.integers(3, 21)), int(rng.integers(1, 6))
            features = rng.normal(size=(n, m))
            targets = rng.integers(0, 2, size=n).astype(float)
            if len(set(targets)) < 2:
                targets[0], targets[1] = 0.0, 1.0
            w = rng.normal(size=m)
            b = float(rng.normal())
            l2 = 0.01
            _, grad_w, grad_b = logistic_loss_grad(w, b, features, targets, l2)
            h = 1e-6
            for j in range(m):
                e = np.zeros(m)
                e[j] = h
                lp, _, _ = logistic_loss_grad(w + e, b, features, targets, l2)
                lm, _, _ = logistic_loss_grad(w - e, b, features, targets, l2)
                fd = (lp - lm) / (2 * h)
                assert grad_w[j] == pytest.approx(fd, rel=1e-5, abs=1e-8)
            lp, _, _ = logistic_loss_grad(w, b + h, features, targets, l2)
            lm, _, _ = logistic_loss_grad(w, b - h, features, targets, l2)
            assert grad_b == pytest.approx((lp - lm) / (2 * h), rel=1e-5, abs=1e-8)


class TestClassification:
    def test_threshold_is_inclusive(self):
        # confidence exactly at the threshold classifies positive
        model = LogisticModel(weights=np.zeros(1), bias=np.log(0.7 / 0.3))
        point = np.zeros(1)
        assert model.confidence(point) == pytest.approx(0.7)
        assert model.classify(point, threshold=model.confidence(point)) == 1

    def test_confidence_strictly_below_threshold_is_negative(self):
        model = LogisticModel(weights=np.array([1.0]), bias=0.0)
        point = np.array([0.6])  # sigmoid(0.6) ~ 0.6457 < 0.7
        assert model.confidence(point) < 0.7
        assert model.classify(point, threshold=0.7) == -1

    def test_threshold_monotonicity_never_flips_negative_to_positive(self):
        rng = np.random.default_rng(0)
        model = LogisticModel(weights=rng.normal(size=3), bias=0.2)
        points = rng.normal(size=(50, 3))
        low = classify_batch(model, points, threshold=0.4)
        high = classify_batch(model, points, threshold=0.8)
        assert not np.any((low == -1) & (high == 1))

    def test_lookup_model_table_and_default(self):
        points = np.array([[0.0, 1.0], [2.0, 3.0]])
        model = LookupModel(points, [1, -1], default_label=-1)
        assert model.classify(points[0], 0.7) == 1
        assert model.classify(points[1], 0.7) == -1
        assert model.classify(np.array([9.0, 9.0]), 0.7) == -1
        assert set(np.unique(model.confidence_batch(points))) <= {0.0, 1.0}


class TestSerialization:
    def test_round_trip_through_json_file(self, tmp_path):
        model = LogisticModel(weights=np.array([0.5, -1.5]), bias=0.25, threshold=0.7)
        path = tmp_path / "model.json"
        model.save(path)
        loaded = LogisticModel.load(path)
        assert np.array_equal(loaded.weights, model.weights)
        assert loaded.bias == model.bias
        assert loaded.threshold == model.threshold

    def test_invalid_document_rejected(self):
        with pytest.raises(ModelError):
            LogisticModel.from_dict({"weights": "nope"})
