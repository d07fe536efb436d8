from typing import Sequence

import numpy as np

from src.core.types import RatingDataset, RatingScale


def user_means(train: RatingDataset) -> np.ndarray:
    """Promedio de cada usuario; NaN para usuarios sin calificaciones."""
    totals = np.bincount(train.users, weights=train.values, minlength=train.n_users)
    counts = np.bincount(train.users, minlength=train.n_users)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, totals / np.maximum(counts, 1), np.nan)


def global_mean(train: RatingDataset) -> float:
    """Promedio global; punto medio de la escala si no hay calificaciones."""
    if len(train) == 0:
        return float(np.mean(train.scale.array))
    return float(np.mean(train.values))


class NaiveRecommender:
    """Predice el promedio de las calificaciones observadas del usuario."""

    def __init__(self, train: RatingDataset):
        self.scale = train.scale
        self.global_mean = global_mean(train)
        means = user_means(train)
        self.means = np.where(np.isnan(means), self.global_mean, means)

    def predict(self, i: int, j: int) -> float:
        return float(self.means[i])

    def predict_many(self, users: Sequence[int], items: Sequence[int]) -> np.ndarray:
        return self.means[np.asarray(users, dtype=np.int64)]


def naive_predict(train: RatingDataset, i: int, j: int) -> float:
    """Media de las calificaciones del usuario i; media global si no calificó nada."""
    return NaiveRecommender(train).predict(i, j)


def round_predictions(values: Sequence[float], scale: RatingScale) -> np.ndarray:
    """Lleva predicciones reales al valor de escala más cercano (empates al menor)."""
    return scale.array[scale.nearest_level(np.asarray(values, dtype=float))]
