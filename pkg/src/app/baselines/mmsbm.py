"""
Modelo de bloques de membresía mixta (no bayesiano) para calificaciones,
ajustado por máxima verosimilitud con EM.

Cada usuario tiene un vector theta_i sobre K grupos, cada ítem un vector
eta_j sobre L grupos, y cada par de grupos una distribución p[k, l, :] sobre
los niveles. El paso E reparte cada calificación observada entre los pares de
grupos con omega_ij(k, l) ∝ theta_ik eta_jl p[k, l, r_ij].
"""
import logging
import time
from typing import Optional, Sequence

import numpy as np

from src.core.types import RatingDataset
from .models import MmsbmConfig, MmsbmModel

_FLOOR = 1e-300


def _responsibilities(train: RatingDataset, theta: np.ndarray, eta: np.ndarray,
                      p: np.ndarray) -> np.ndarray:
    return (theta[train.users][:, :, None] * eta[train.items][:, None, :]
            * np.transpose(p[:, :, train.levels], (2, 0, 1)))


def _log_likelihood(weights: np.ndarray) -> float:
    return float(np.sum(np.log(np.maximum(weights.sum(axis=(1, 2)), _FLOOR))))


def _normalize_last(values: np.ndarray) -> np.ndarray:
    totals = values.sum(axis=-1, keepdims=True)
    uniform = np.full_like(values, 1.0 / values.shape[-1])
    return np.divide(values, totals, out=uniform, where=totals > 0)


def mmsbm_fit(train: RatingDataset, cfg: MmsbmConfig,
              logger: Optional[logging.Logger] = None) -> MmsbmModel:
    """
    Ajusta theta, eta y p por EM hasta que el cambio relativo de la
    log-verosimilitud sea menor que cfg.tol.

    Raises:
        ValueError: Si no hay calificaciones
    """
    logger = logger or logging.getLogger(__name__)
    if len(train) == 0:
        raise ValueError("El modelo de bloques necesita al menos una calificación")

    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    S = train.n_levels
    theta = _normalize_last(rng.random((train.n_users, cfg.K)))
    eta = _normalize_last(rng.random((train.n_items, cfg.L)))
    p = _normalize_last(rng.random((cfg.K, cfg.L, S)))

    user_counts = np.bincount(train.users, minlength=train.n_users)[:, None]
    item_counts = np.bincount(train.items, minlength=train.n_items)[:, None]

    trace = []
    converged = False
    iteration = 0
    for iteration in range(1, cfg.max_iters + 1):
        weights = _responsibilities(train, theta, eta, p)
        trace.append(_log_likelihood(weights))
        omega = weights / np.maximum(weights.sum(axis=(1, 2), keepdims=True), _FLOOR)

        new_theta = np.zeros_like(theta)
        np.add.at(new_theta, train.users, omega.sum(axis=2))
        theta = np.where(user_counts > 0, new_theta / np.maximum(user_counts, 1), 1.0 / cfg.K)

        new_eta = np.zeros_like(eta)
        np.add.at(new_eta, train.items, omega.sum(axis=1))
        eta = np.where(item_counts > 0, new_eta / np.maximum(item_counts, 1), 1.0 / cfg.L)

        counts = np.zeros((cfg.K, cfg.L, S))
        for s in range(S):
            mask = train.levels == s
            if np.any(mask):
                counts[:, :, s] = omega[mask].sum(axis=0)
        p = _normalize_last(counts)

        if len(trace) > 1 and abs(trace[-1] - trace[-2]) < cfg.tol * abs(trace[-2]):
            converged = True
            break

    elapsed = time.perf_counter() - start
    logger.info(
        f"MMSBM K={cfg.K}, L={cfg.L}: {iteration} iteraciones, convergió={converged}, "
        f"log-verosimilitud={trace[-1]:.4f}, {elapsed:.2f}s"
    )
    return MmsbmModel(theta, eta, p, train.scale, trace, iteration, converged)


def mmsbm_distribution_many(model: MmsbmModel, users: Sequence[int], items: Sequence[int]) -> np.ndarray:
    """sum_k sum_l theta_ik eta_jl p[k, l, :] para cada par."""
    users = np.asarray(users, dtype=np.int64)
    items = np.asarray(items, dtype=np.int64)
    K, L, S = model.p.shape
    user_side = (model.theta[users] @ model.p.reshape(K, L * S)).reshape(-1, L, S)
    return np.einsum("nls,nl->ns", user_side, model.eta[items])


def mmsbm_predict_many(model: MmsbmModel, users: Sequence[int], items: Sequence[int]) -> np.ndarray:
    """Valor de escala del nivel más probable (empates al menor)."""
    levels = np.argmax(mmsbm_distribution_many(model, users, items), axis=1)
    return model.scale.array[levels]


def mmsbm_predict(model: MmsbmModel, i: int, j: int) -> float:
    return float(mmsbm_predict_many(model, [i], [j])[0])
