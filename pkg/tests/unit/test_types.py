import numpy as np
import pytest
from pydantic import ValidationError

from src.core.types import BlockArray, ModelConfig, RatingDataset, RatingScale


class TestRatingScale:
    def test_integer_scale(self):
        scale = RatingScale.integer(1, 5)
        assert scale.values == (1.0, 2.0, 3.0, 4.0, 5.0)
        assert scale.size == 5
        assert scale.level_of(4) == 3
        assert scale.value_of(0) == 1.0

    def test_rejects_short_or_unsorted_scales(self):
        with pytest.raises(ValueError):
            RatingScale((1.0,))
        with pytest.raises(ValueError):
            RatingScale((1.0, 3.0, 2.0))

    def test_unknown_value(self):
        with pytest.raises(ValueError, match="no pertenece"):
            RatingScale.integer(1, 5).level_of(3.5)

    def test_nearest_level_ties_go_down(self):
        scale = RatingScale.integer(1, 5)
        np.testing.assert_array_equal(scale.nearest_level(np.array([0.2, 2.5, 3.6, 9.0])), [0, 1, 3, 4])


class TestRatingDataset:
    def test_adjacency(self, tiny_dataset):
        assert len(tiny_dataset) == 8
        assert [list(p) for p in tiny_dataset.user_ratings] == [[0, 1, 2], [3, 4, 5], [6, 7]]
        assert sorted(tiny_dataset.item_ratings[2].tolist()) == [2, 6]
        np.testing.assert_array_equal(tiny_dataset.values[:3], [5.0, 4.0, 1.0])

    def test_level_histogram(self, tiny_dataset):
        hist = tiny_dataset.level_histogram()
        assert hist.sum() == pytest.approx(1.0)
        assert hist[0] == pytest.approx(2 / 8)

    def test_duplicates_rejected(self, scale5):
        with pytest.raises(ValueError, match="duplicados"):
            RatingDataset.from_triplets(2, 2, scale5, [(0, 0, 1), (0, 0, 2)])

    def test_out_of_range(self, scale5):
        with pytest.raises(ValueError):
            RatingDataset.from_triplets(2, 2, scale5, [(2, 0, 1)])
        with pytest.raises(ValueError):
            RatingDataset.from_triplets(2, 2, scale5, [(0, 0, 5)])

    def test_arrays_are_read_only(self, tiny_dataset):
        with pytest.raises(ValueError):
            tiny_dataset.levels[0] = 0

    def test_subset_keeps_dimensions(self, tiny_dataset):
        sub = tiny_dataset.subset([0, 7])
        assert (sub.n_users, sub.n_items, len(sub)) == (3, 4, 2)
        assert sub.triplets() == [(0, 0, 4), (2, 3, 0)]


class TestModelConfig:
    def test_non_informative(self):
        config = ModelConfig.non_informative(4, 2)
        assert config.alpha == [0.25] * 4
        assert config.beta == [0.5, 0.5]
        assert config.max_iters == 500
        assert config.rel_tol == 1e-6

    def test_hyperparameter_lengths(self):
        with pytest.raises(ValidationError):
            ModelConfig(K=2, L=2, alpha=[1.0], beta=[1.0, 1.0])

    def test_hyperparameters_positive(self):
        with pytest.raises(ValidationError):
            ModelConfig(K=2, L=1, alpha=[1.0, 0.0], beta=[1.0])


class TestBlockArray:
    def test_from_unnormalized(self):
        mu = BlockArray.from_unnormalized(np.array([[[1.0, 3.0]]]))
        np.testing.assert_allclose(mu.mu, [[[0.25, 0.75]]])

    def test_rows_must_sum_to_one(self):
        with pytest.raises(ValueError):
            BlockArray(np.array([[[0.5, 0.6]]]))

    def test_uniform(self):
        assert BlockArray.uniform(2, 3, 4).mu[1, 2, 3] == pytest.approx(0.25)
