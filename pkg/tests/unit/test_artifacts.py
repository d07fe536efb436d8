import numpy as np
import pandas as pd
import pytest

from src.app.prediction.models import EvalReport, MembershipEstimates
from src.app.selection.models import CvCandidateSummary, CvFoldResult, CvReport
from src.core.types import BlockArray, RatingScale
from src.database.artifacts import ArtifactStore
from src.database.movielens import IdMapping


@pytest.fixture
def store(tmp_path):
    return ArtifactStore(str(tmp_path / "artifacts"))


def test_matrix_round_trip_is_bit_exact(store):
    values = np.random.default_rng(0).random((3, 4, 2)) / 3.0
    store.write_matrix("values.txt", values)
    loaded = store.load_matrix("values.txt")
    assert loaded.shape == values.shape
    np.testing.assert_array_equal(loaded, values)


def test_model_round_trip(store):
    rng = np.random.default_rng(1)
    mu = BlockArray.from_unnormalized(rng.random((2, 3, 5)) + 0.1)
    pi_u = rng.random((4, 2))
    pi_i = rng.random((6, 3))
    est = MembershipEstimates(pi_u / pi_u.sum(axis=1, keepdims=True), pi_i / pi_i.sum(axis=1, keepdims=True))
    mapping = IdMapping((5, 9, 12, 40), (1, 2, 3, 5, 8, 13))

    store.write_model(mu, est, RatingScale.integer(1, 5), mapping)
    loaded_mu, loaded_est, scale, loaded_mapping = store.load_model()
    np.testing.assert_array_equal(loaded_mu.mu, mu.mu)
    np.testing.assert_array_equal(loaded_est.pi_u, est.pi_u)
    np.testing.assert_array_equal(loaded_est.pi_i, est.pi_i)
    assert scale.values == (1.0, 2.0, 3.0, 4.0, 5.0)
    assert loaded_mapping == mapping


def test_missing_artifact(store):
    with pytest.raises(FileNotFoundError):
        store.load_matrix("mu.txt")


def test_bad_matrix_header(store):
    with open(store.path("broken.txt"), "w", encoding="utf-8") as f:
        f.write("1 2 3\n")
    with pytest.raises(ValueError, match="shape"):
        store.load_matrix("broken.txt")


def test_metrics_report(store):
    frame = store.write_metrics({
        "BM2": EvalReport(mae=0.8, mse=1.3, ar=0.4, n_evaluated=100),
        "naive": EvalReport(mae=0.9, mse=1.4, ar=0.0, n_evaluated=100),
    })
    assert list(frame["model"]) == ["BM2", "naive"]
    csv = pd.read_csv(store.path("metrics.csv"))
    assert csv.loc[0, "mae"] == pytest.approx(0.8)
    with open(store.path("metrics.txt"), encoding="utf-8") as f:
        text = f.read()
    assert "BM2" in text and "0.8000" in text


def test_elbo_trace(store):
    store.write_elbo_trace([-10.5, -9.25, -9.0])
    trace = pd.read_csv(store.path("elbo_trace.csv"))
    assert trace["step"].tolist() == [1, 2, 3]
    assert trace["elbo"].tolist() == [-10.5, -9.25, -9.0]


def test_predictions_use_original_ids(store):
    mapping = IdMapping((100, 200), (7, 8))
    store.write_predictions([0, 1], [1, 0], [4.0, 2.0], truth=[5.0, 2.0], mapping=mapping)
    frame = pd.read_csv(store.path("predictions.csv"))
    assert frame["user_id"].tolist() == [100, 200]
    assert frame["item_id"].tolist() == [8, 7]
    assert frame["rating"].tolist() == [5.0, 2.0]


def test_cv_report(store):
    report = CvReport(
        folds=[CvFoldResult(K=1, L=1, replicate=0, fold=0, mae=1.0),
               CvFoldResult(K=1, L=1, replicate=0, fold=1, mae=0.8)],
        summary=[CvCandidateSummary(K=1, L=1, mean_mae=0.9, fold_maes=[1.0, 0.8], selected=True)],
        selected=(1, 1),
    )
    store.write_cv_report(report)
    assert len(pd.read_csv(store.path("cv_folds.csv"))) == 2
    summary = pd.read_csv(store.path("cv_summary.csv"))
    assert bool(summary.loc[0, "selected"])


def test_graph_edges_bands_and_filter(store, tiny_dataset):
    mapping = IdMapping((10, 20, 30), (1, 2, 3, 4))
    frame = store.write_graph_edges(tiny_dataset, mapping)
    assert len(frame) == len(tiny_dataset)
    assert set(frame.columns) == {"source", "target", "rating", "band"}
    high = frame[frame["band"] == "high"]
    assert (high["rating"] >= 4).all()
    assert (frame[frame["band"] == "low"]["rating"] < 4).all()
    assert frame.loc[0, "source"] == "u10" and frame.loc[0, "target"] == "i1"

    user_clusters = np.array([0, 0, 1])
    item_clusters = np.array([0, 0, 1, 1])
    sub = store.write_graph_edges(tiny_dataset, mapping, user_clusters, item_clusters,
                                  keep_user_clusters=[1], keep_item_clusters=[1], name="sub.csv")
    assert len(sub) == 4
    assert set(sub["source_cluster"]) == {1} and set(sub["target_cluster"]) == {1}
