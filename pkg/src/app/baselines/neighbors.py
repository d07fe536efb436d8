"""
Filtrado colaborativo por vecindario con similitud coseno sobre
coordenadas co-calificadas.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from src.core.types import RatingDataset
from .models import Fallback, NeighborConfig
from .naive import global_mean, user_means


def cosine_similarity(a: Sequence[float], b: Sequence[float], min_overlap: int = 1,
                      mask_a: Optional[Sequence[bool]] = None,
                      mask_b: Optional[Sequence[bool]] = None) -> float:
    """
    Coseno entre dos vectores de calificaciones restringido a las
    coordenadas que ambos calificaron.

    Sin máscaras explícitas, 0 y NaN marcan coordenadas no calificadas.

    Args:
        a: Vector de calificaciones
        b: Vector de calificaciones sobre el mismo espacio de índices
        min_overlap: Mínimo de coordenadas co-calificadas
        mask_a: Coordenadas calificadas de a (opcional)
        mask_b: Coordenadas calificadas de b (opcional)

    Returns:
        Similitud en [-1, 1]; 0 si alguna norma es 0 o el solapamiento es insuficiente
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"Los vectores tienen formas distintas: {a.shape} y {b.shape}")
    rated_a = np.asarray(mask_a, dtype=bool) if mask_a is not None else (np.nan_to_num(a) != 0)
    rated_b = np.asarray(mask_b, dtype=bool) if mask_b is not None else (np.nan_to_num(b) != 0)
    common = rated_a & rated_b
    if common.sum() < min_overlap:
        return 0.0
    x, y = a[common], b[common]
    norm = np.linalg.norm(x) * np.linalg.norm(y)
    if norm == 0:
        return 0.0
    return float(np.clip(np.dot(x, y) / norm, -1.0, 1.0))


def similarity_matrix(ratings: np.ndarray, rated: np.ndarray, min_overlap: int = 1) -> np.ndarray:
    """
    Coseno co-calificado entre todas las filas de una matriz densa.

    Args:
        ratings: Matriz de valores (0 donde no hay calificación)
        rated: Máscara booleana de coordenadas calificadas

    Returns:
        Matriz simétrica de similitudes con diagonal en 0
    """
    values = np.where(rated, ratings, 0.0)
    indicator = rated.astype(float)
    squares = values ** 2
    dot = values @ values.T
    norm_left = np.sqrt(squares @ indicator.T)
    overlap = indicator @ indicator.T
    denominator = norm_left * norm_left.T
    valid = (denominator > 0) & (overlap >= min_overlap)
    sims = np.divide(dot, denominator, out=np.zeros_like(dot), where=valid)
    np.fill_diagonal(sims, 0.0)
    return np.clip(sims, -1.0, 1.0)


class NeighborRecommender:
    """
    Recomendador por vecindario. Con by_user=True compara usuarios (filas de
    la matriz de calificaciones); con by_user=False compara ítems.

    La matriz de similitudes se calcula una vez por conjunto de entrenamiento.
    """

    def __init__(self, train: RatingDataset, cfg: Optional[NeighborConfig] = None,
                 by_user: bool = True, logger: Optional[logging.Logger] = None):
        self.cfg = cfg or NeighborConfig()
        self.by_user = by_user
        self.logger = logger or logging.getLogger(__name__)

        ratings = np.zeros((train.n_users, train.n_items))
        rated = np.zeros((train.n_users, train.n_items), dtype=bool)
        ratings[train.users, train.items] = train.values
        rated[train.users, train.items] = True
        self.ratings = ratings if by_user else ratings.T
        self.rated = rated if by_user else rated.T

        self.global_mean = global_mean(train)
        means = user_means(train)
        self.user_means = np.where(np.isnan(means), self.global_mean, means)

        self.similarities = similarity_matrix(self.ratings, self.rated, self.cfg.min_overlap)
        side = "usuarios" if by_user else "ítems"
        self.logger.info(f"Similitudes coseno calculadas entre {self.similarities.shape[0]} {side}")

    def _fallback(self, user: int) -> float:
        if self.cfg.fallback == Fallback.user_mean:
            return float(self.user_means[user])
        return self.global_mean

    def predict(self, i: int, j: int) -> float:
        """Promedio ponderado por similitud de los vecinos que calificaron el par."""
        target, other = (i, j) if self.by_user else (j, i)
        sims = self.similarities[target]
        candidates = np.flatnonzero(self.rated[:, other] & (sims > 0))
        if candidates.size == 0:
            return self._fallback(i)
        if self.cfg.k_neighbors != "all" and candidates.size > self.cfg.k_neighbors:
            order = np.argsort(-sims[candidates], kind="stable")
            candidates = candidates[order[: self.cfg.k_neighbors]]
        weights = sims[candidates]
        return float(np.dot(weights, self.ratings[candidates, other]) / weights.sum())

    def predict_many(self, users: Sequence[int], items: Sequence[int]) -> np.ndarray:
        return np.array([self.predict(int(i), int(j)) for i, j in zip(users, items)], dtype=float)


class UserBasedRecommender(NeighborRecommender):
    def __init__(self, train: RatingDataset, cfg: Optional[NeighborConfig] = None,
                 logger: Optional[logging.Logger] = None):
        super().__init__(train, cfg, by_user=True, logger=logger)


class ItemBasedRecommender(NeighborRecommender):
    def __init__(self, train: RatingDataset, cfg: Optional[NeighborConfig] = None,
                 logger: Optional[logging.Logger] = None):
        super().__init__(train, cfg, by_user=False, logger=logger)


def user_based_predict(train: RatingDataset, i: int, j: int, cfg: Optional[NeighborConfig] = None) -> float:
    """Predicción usuario-usuario para un solo par; para lotes usar UserBasedRecommender."""
    return UserBasedRecommender(train, cfg).predict(i, j)


def item_based_predict(train: RatingDataset, i: int, j: int, cfg: Optional[NeighborConfig] = None) -> float:
    """Predicción ítem-ítem para un solo par; para lotes usar ItemBasedRecommender."""
    return ItemBasedRecommender(train, cfg).predict(i, j)
