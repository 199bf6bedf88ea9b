import numpy as np
import pytest

from oracles import lof_direct
from pupguard.classify import (
    Prediction,
    decision_and,
    load_model,
    lof_fit,
    lof_score,
    make_verdict,
    save_model,
)
from pupguard.classify.lof import LRD_CAP


def _grid(spacing=1.0):
    xs, ys = np.meshgrid(np.arange(10), np.arange(10))
    return np.stack([xs.ravel(), ys.ravel()], axis=1).astype(float) * spacing


class TestFit:
    def test_collinear_equidistant(self):
        X = np.array([[0.0], [1.0], [2.0]])
        model = lof_fit(X, k=1)
        assert np.allclose(model.k_distances, 1.0)
        assert np.allclose(model.lrd, model.lrd[0])

    def test_duplicates_guarded(self):
        X = np.array([[1.0, 1.0]] * 5 + [[2.0, 2.0]])
        model = lof_fit(X, k=2)
        assert np.all(np.isfinite(model.lrd))
        assert model.lrd.max() == LRD_CAP
        # a query coincident with the duplicated cluster is unremarkable
        assert lof_score(model, np.array([1.0, 1.0])) <= 1.5

    def test_deterministic(self):
        X = np.random.default_rng(0).normal(size=(40, 3))
        a = lof_fit(X, k=5)
        b = lof_fit(X, k=5)
        assert np.array_equal(a.neighbors, b.neighbors)
        assert np.array_equal(a.lrd, b.lrd)

    def test_tie_break_by_index(self):
        # three points equidistant from index 0: neighbor order 1, 2, 3
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        model = lof_fit(X, k=3)
        assert model.neighbors[0].tolist() == [1, 2, 3]

    def test_k_out_of_range(self):
        X = np.zeros((5, 2))
        for k in (0, 5, 9):
            with pytest.raises(ValueError):
                lof_fit(X, k=k)

    def test_default_k(self):
        X = np.random.default_rng(1).normal(size=(10, 2))
        assert lof_fit(X).k == 9
        X = np.random.default_rng(1).normal(size=(50, 2))
        assert lof_fit(X).k == 20


class TestScore:
    def test_uniform_grid_interior_near_one(self):
        model = lof_fit(_grid(), k=20)
        assert 0.9 <= lof_score(model, np.array([5.0, 5.0])) <= 1.1

    def test_far_probe_flagged(self):
        model = lof_fit(_grid(), k=20)
        assert lof_score(model, np.array([4.5, 9.0 + 10.0])) > 2.0

    def test_coincident_with_cluster_point(self):
        # n=5, k=2, hand-checkable: query sits exactly on a cluster member
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [50.0, 50.0]])
        model = lof_fit(X, k=2)
        score = lof_score(model, np.array([0.0, 0.0]))
        assert score == pytest.approx(1.0, abs=0.05)

    def test_matches_direct_oracle(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(30, 2))
        model = lof_fit(X, k=4)
        for x in rng.normal(size=(10, 2)) * 2.0:
            assert lof_score(model, x) == pytest.approx(
                lof_direct(X, x, 4), rel=1e-9
            )

    def test_scale_covariance(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(25, 3))
        x = rng.normal(size=3) * 3.0
        a = lof_score(lof_fit(X, k=5), x)
        b = lof_score(lof_fit(X * 7.5, k=5), x * 7.5)
        assert a == pytest.approx(b, rel=1e-9)

    def test_dimension_mismatch(self):
        model = lof_fit(_grid(), k=3)
        with pytest.raises(ValueError):
            lof_score(model, np.zeros(3))


class TestVerdicts:
    def test_margin_sign_matches_threshold(self):
        model = lof_fit(_grid(), k=20, threshold=1.5)
        normal = make_verdict(model, np.array([5.0, 5.0]), "a")
        assert normal.prediction is Prediction.NORMAL and normal.score >= 0
        outlier = make_verdict(model, np.array([40.0, 40.0]), "a")
        assert outlier.prediction is Prediction.ANOMALOUS and outlier.score < 0

    def test_decision_and_truth_table(self):
        from pupguard.classify import Verdict

        normal = Verdict("p", 0.5, Prediction.NORMAL)
        anomalous = Verdict("p", -0.2, Prediction.ANOMALOUS)
        assert decision_and(normal, normal).prediction is Prediction.NORMAL
        assert decision_and(normal, anomalous).prediction is Prediction.ANOMALOUS
        assert decision_and(anomalous, normal).prediction is Prediction.ANOMALOUS
        assert decision_and(anomalous, anomalous).prediction is Prediction.ANOMALOUS
        assert decision_and(normal, anomalous).score == -0.2  # weaker margin

    def test_decision_and_pair_mismatch(self):
        from pupguard.classify import Verdict

        a = Verdict("p1", 0.5, Prediction.NORMAL)
        b = Verdict("p2", 0.5, Prediction.NORMAL)
        with pytest.raises(ValueError):
            decision_and(a, b)


class TestSerialization:
    def test_round_trip_scores(self):
        X = np.random.default_rng(7).normal(size=(30, 2))
        model = lof_fit(X, k=5)
        back = load_model(save_model(model))
        for x in X[:5]:
            assert lof_score(back, x) == lof_score(model, x)

    def test_model_file_round_trip(self, tmp_path):
        import json

        from pupguard.classify import load_model_file, save_model_file

        X = np.random.default_rng(8).normal(size=(25, 2))
        model = lof_fit(X, k=4)
        path = str(tmp_path / "lof.json")
        save_model_file(model, path)
        doc = json.load(open(path))
        assert doc["format_version"] == 1 and doc["family"] == "lof"
        back = load_model_file(path)
        assert lof_score(back, X[0]) == lof_score(model, X[0])

    def test_unknown_family_rejected(self):
        from pupguard.classify import load_model
        from pupguard.errors import ConfigError

        with pytest.raises(ConfigError, match="family"):
            load_model({"format_version": 1, "family": "nope", "params": {}})
