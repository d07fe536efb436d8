"""
Factorización de matrices probabilística por descenso de gradiente por
bloques: en cada época se actualiza U con V fijo y después V con U fijo.

El objetivo es sum_obs (r_ij - u_i . v_j)^2 + lambda (||U||^2 + ||V||^2). El
gradiente de cada fila se divide por su número de calificaciones, así un
mismo learning_rate sirve para usuarios e ítems con actividad muy distinta.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from src.core.types import RatingDataset
from .models import PmfConfig, PmfFactors

_MAX_CONSECUTIVE_INCREASES = 3
_INCREASE_SLACK = 1e-8


def pmf_objective(train: RatingDataset, U: np.ndarray, V: np.ndarray, regularization: float) -> float:
    residuals = train.values - np.sum(U[train.users] * V[train.items], axis=1)
    return float(np.sum(residuals ** 2) + regularization * (np.sum(U ** 2) + np.sum(V ** 2)))


def _row_step(rows: np.ndarray, own: np.ndarray, other: np.ndarray, other_index: np.ndarray,
              values: np.ndarray, counts: np.ndarray, cfg: PmfConfig) -> np.ndarray:
    residuals = values - np.sum(own[rows] * other[other_index], axis=1)
    gradient = 2.0 * cfg.regularization * own
    np.add.at(gradient, rows, -2.0 * residuals[:, None] * other[other_index])
    return own - cfg.learning_rate * gradient / np.maximum(counts, 1)[:, None]


def pmf_fit(train: RatingDataset, cfg: Optional[PmfConfig] = None,
            logger: Optional[logging.Logger] = None) -> PmfFactors:
    """
    Ajusta los factores de usuarios e ítems.

    Args:
        train: Calificaciones de entrenamiento (no vacío)
        cfg: Configuración de PMF
        logger: Logger opcional

    Returns:
        PmfFactors con U (N x rank), V (M x rank) y la traza del objetivo

    Raises:
        ValueError: Si no hay calificaciones
        FloatingPointError: Si el objetivo crece varias épocas seguidas o deja de ser finito
    """
    cfg = cfg or PmfConfig()
    logger = logger or logging.getLogger(__name__)
    if len(train) == 0:
        raise ValueError("PMF necesita al menos una calificación de entrenamiento")

    rng = np.random.default_rng(cfg.seed)
    base = np.sqrt(max(float(np.mean(train.values)), 1e-12) / cfg.rank)
    U = base + 0.1 * base * rng.standard_normal((train.n_users, cfg.rank))
    V = base + 0.1 * base * rng.standard_normal((train.n_items, cfg.rank))
    user_counts = np.bincount(train.users, minlength=train.n_users)
    item_counts = np.bincount(train.items, minlength=train.n_items)

    trace = [pmf_objective(train, U, V, cfg.regularization)]
    increases = 0
    converged = False
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        U = _row_step(train.users, U, V, train.items, train.values, user_counts, cfg)
        V = _row_step(train.items, V, U, train.users, train.values, item_counts, cfg)
        objective = pmf_objective(train, U, V, cfg.regularization)
        if not np.isfinite(objective):
            raise FloatingPointError(
                f"El objetivo de PMF dejó de ser finito en la época {epoch}; "
                f"pruebe un learning_rate menor que {cfg.learning_rate}"
            )
        previous = trace[-1]
        trace.append(objective)

        increases = increases + 1 if objective > previous * (1 + _INCREASE_SLACK) else 0
        if increases >= _MAX_CONSECUTIVE_INCREASES:
            logger.error(f"PMF diverge en la época {epoch}: objetivo {objective:.4f}")
            raise FloatingPointError(
                f"El objetivo de PMF creció {increases} épocas seguidas (época {epoch}); "
                f"pruebe un learning_rate menor que {cfg.learning_rate}"
            )
        if abs(previous - objective) < cfg.tol * max(abs(previous), 1e-300):
            converged = True
            break

    logger.info(f"PMF rank={cfg.rank}: {epoch} épocas, objetivo {trace[-1]:.4f}, convergió={converged}")
    return PmfFactors(U, V, train.scale, trace, epoch, converged)


def pmf_predict_many(factors: PmfFactors, users: Sequence[int], items: Sequence[int]) -> np.ndarray:
    """u_i . v_j recortado a [C_1, C_S]."""
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    raw = np.sum(factors.user_factors[users] * factors.item_factors[items], axis=1)
    return np.clip(raw, factors.scale.values[0], factors.scale.values[-1])


def pmf_predict(factors: PmfFactors, i: int, j: int) -> float:
    return float(pmf_predict_many(factors, [i], [j])[0])
