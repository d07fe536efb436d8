import numpy as np
import pytest

from src.app.prediction.models import MembershipEstimates
from src.app.prediction.predictor import (
    cluster_summary, estimate_memberships, hard_assignments, predict, predict_distribution,
    predict_distribution_many, predict_many,
)
from src.core.types import BlockArray, FitResult, RatingScale, VariationalState


@pytest.fixture
def two_block_model():
    """Usuarios/ítems 0 en el grupo bajo y 1 en el alto; el usuario 2 y el ítem 2 son mixtos."""
    mu = np.zeros((2, 2, 5))
    mu[0, 0] = [0.7, 0.2, 0.1, 0.0, 0.0]
    mu[0, 1] = [0.1, 0.6, 0.3, 0.0, 0.0]
    mu[1, 0] = [0.0, 0.0, 0.3, 0.6, 0.1]
    mu[1, 1] = [0.0, 0.0, 0.1, 0.2, 0.7]
    est = MembershipEstimates(
        pi_u=np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]),
        pi_i=np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]),
    )
    return est, BlockArray(mu)


def test_estimate_memberships_normalizes_gamma():
    state = VariationalState(
        gamma_u=np.array([[1.0, 3.0]]), gamma_i=np.array([[2.0, 2.0, 4.0]]),
        phi_u=np.ones((0, 2)), phi_i=np.ones((0, 3)),
    )
    result = FitResult(state=state, mu=BlockArray.uniform(2, 3, 2), elbo_trace=[0.0], n_iters=1, converged=True)
    est = estimate_memberships(result)
    np.testing.assert_allclose(est.pi_u, [[0.25, 0.75]])
    np.testing.assert_allclose(est.pi_i, [[0.25, 0.25, 0.5]])


def test_distribution_rows_sum_to_one(two_block_model):
    est, mu = two_block_model
    users, items = np.meshgrid(np.arange(3), np.arange(3), indexing="ij")
    dist = predict_distribution_many(est, mu, users.ravel(), items.ravel())
    np.testing.assert_allclose(dist.sum(axis=1), 1.0, atol=1e-12)


def test_pure_memberships_pick_block_mode(two_block_model):
    est, mu = two_block_model
    np.testing.assert_allclose(predict_distribution(est, mu, 1, 1), mu.mu[1, 1])
    assert predict(est, mu, 0, 0, RatingScale.integer(1, 5)) == 1.0
    assert predict(est, mu, 1, 1, RatingScale.integer(1, 5)) == 5.0
    np.testing.assert_array_equal(predict_many(est, mu, [0, 1, 0], [1, 0, 0]), [1, 3, 0])


def test_mixed_membership_averages_blocks(two_block_model):
    est, mu = two_block_model
    expected = mu.mu.mean(axis=(0, 1))
    np.testing.assert_allclose(predict_distribution(est, mu, 2, 2), expected)


def test_ties_go_to_lowest_level():
    est = MembershipEstimates(np.ones((1, 1)), np.ones((1, 1)))
    mu = BlockArray(np.array([[[0.2, 0.4, 0.4]]]))
    assert predict(est, mu, 0, 0, RatingScale((1.0, 2.0, 3.0))) == 2.0


def test_out_of_range_indices(two_block_model):
    est, mu = two_block_model
    with pytest.raises(IndexError):
        predict(est, mu, 3, 0, RatingScale.integer(1, 5))
    with pytest.raises(IndexError):
        predict_many(est, mu, [0], [-1])


def test_memberships_must_match_blocks(two_block_model):
    est, _ = two_block_model
    with pytest.raises(ValueError):
        predict_many(est, BlockArray.uniform(3, 2, 5), [0], [0])


def test_memberships_validated_on_simplex():
    with pytest.raises(ValueError):
        MembershipEstimates(np.array([[0.6, 0.6]]), np.ones((1, 1)))


def test_hard_assignments_ties_to_smallest_index():
    np.testing.assert_array_equal(hard_assignments(np.array([[0.5, 0.5], [0.2, 0.8]])), [0, 1])


def test_cluster_summary(tiny_dataset):
    est = MembershipEstimates(
        pi_u=np.array([[0.9, 0.1], [0.8, 0.2], [0.1, 0.9]]),
        pi_i=np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]),
    )
    summary = cluster_summary(tiny_dataset, est)
    assert list(summary.columns) == ["side", "cluster", "size", "n_ratings", "avg_rating"]
    assert len(summary) == 4

    users = summary[summary["side"] == "user"].set_index("cluster")
    assert users.loc[1, "size"] == 2
    assert users.loc[1, "n_ratings"] == 6
    assert users.loc[1, "avg_rating"] == pytest.approx((5 + 4 + 1 + 4 + 5 + 2) / 6)
    assert users.loc[2, "avg_rating"] == pytest.approx(1.5)

    items = summary[summary["side"] == "item"].set_index("cluster")
    assert items.loc[1, "avg_rating"] == pytest.approx((5 + 4 + 4 + 5) / 4)
    assert items.loc[2, "avg_rating"] == pytest.approx((1 + 2 + 2 + 1) / 4)
