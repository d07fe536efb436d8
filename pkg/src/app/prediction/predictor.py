"""
Estimación de membresías y predicción MAP de calificaciones a partir de un
modelo ajustado.
"""
from typing import Sequence

import numpy as np
import pandas as pd

from src.core.types import BlockArray, FitResult, RatingDataset, RatingScale
from .models import MembershipEstimates


def estimate_memberships(result: FitResult) -> MembershipEstimates:
    """
    Normaliza por filas gamma_u y gamma_i: pi_ik = gamma_ik / sum_k gamma_ik.

    Args:
        result: Resultado de un ajuste

    Returns:
        MembershipEstimates con pi_u (N x K) y pi_i (M x L)
    """
    gamma_u, gamma_i = result.state.gamma_u, result.state.gamma_i
    return MembershipEstimates(
        pi_u=gamma_u / gamma_u.sum(axis=1, keepdims=True),
        pi_i=gamma_i / gamma_i.sum(axis=1, keepdims=True),
    )


def _check_indices(users: np.ndarray, items: np.ndarray, est: MembershipEstimates):
    if users.size and (users.min() < 0 or users.max() >= est.n_users):
        raise IndexError(f"Índice de usuario fuera de rango [0, {est.n_users})")
    if items.size and (items.min() < 0 or items.max() >= est.n_items):
        raise IndexError(f"Índice de ítem fuera de rango [0, {est.n_items})")


def _check_blocks(est: MembershipEstimates, mu: BlockArray):
    K, L, _ = mu.shape
    if est.pi_u.shape[1] != K or est.pi_i.shape[1] != L:
        raise ValueError(
            f"Las membresías ({est.pi_u.shape[1]}, {est.pi_i.shape[1]}) no coinciden con mu {mu.shape}"
        )


def predict_distribution_many(est: MembershipEstimates, mu: BlockArray,
                              users: Sequence[int], items: Sequence[int]) -> np.ndarray:
    """
    p_s = sum_k sum_l pi_u[i, k] mu[k, l, s] pi_i[j, l] para cada par (i, j).

    Returns:
        Arreglo (n_pares x S); cada fila suma 1
    """
    users = np.asarray(users, dtype=np.int64).reshape(-1)
    items = np.asarray(items, dtype=np.int64).reshape(-1)
    _check_indices(users, items, est)
    _check_blocks(est, mu)
    K, L, S = mu.shape
    user_side = (est.pi_u[users] @ mu.mu.reshape(K, L * S)).reshape(-1, L, S)
    return np.einsum("nls,nl->ns", user_side, est.pi_i[items])


def predict_distribution(est: MembershipEstimates, mu: BlockArray, i: int, j: int) -> np.ndarray:
    return predict_distribution_many(est, mu, [i], [j])[0]


def predict_many(est: MembershipEstimates, mu: BlockArray,
                 users: Sequence[int], items: Sequence[int]) -> np.ndarray:
    """Índices de nivel s* = argmax_s p_s; los empates van al nivel menor."""
    return np.argmax(predict_distribution_many(est, mu, users, items), axis=1)


def predict(est: MembershipEstimates, mu: BlockArray, i: int, j: int, scale: RatingScale) -> float:
    """
    Predicción MAP del par (i, j) expresada como valor de la escala C_{s*}.

    Raises:
        IndexError: Si i o j están fuera de rango
    """
    return scale.value_of(int(predict_many(est, mu, [i], [j])[0]))


def hard_assignments(pi: np.ndarray) -> np.ndarray:
    """Cluster de mayor peso por fila (empates al índice menor)."""
    return np.argmax(np.asarray(pi), axis=1)


def _side_summary(side: str, assignments: np.ndarray, n_clusters: int,
                  rating_owner: np.ndarray, values: np.ndarray) -> pd.DataFrame:
    sizes = np.bincount(assignments, minlength=n_clusters)
    owner_cluster = assignments[rating_owner]
    totals = np.bincount(owner_cluster, weights=values, minlength=n_clusters)
    counts = np.bincount(owner_cluster, minlength=n_clusters)
    with np.errstate(invalid="ignore", divide="ignore"):
        averages = np.where(counts > 0, totals / np.maximum(counts, 1), np.nan)
    return pd.DataFrame({
        "side": side,
        "cluster": np.arange(1, n_clusters + 1),
        "size": sizes,
        "n_ratings": counts,
        "avg_rating": averages,
    })


def cluster_summary(data: RatingDataset, est: MembershipEstimates) -> pd.DataFrame:
    """
    Tabla por cluster de usuarios y de ítems con el tamaño (asignación dura) y
    la calificación promedio observada. Los clusters se numeran desde 1.
    """
    if est.n_users != data.n_users or est.n_items != data.n_items:
        raise ValueError("Las membresías no corresponden a las dimensiones del dataset")
    user_table = _side_summary("user", hard_assignments(est.pi_u), est.pi_u.shape[1],
                               data.users, data.values)
    item_table = _side_summary("item", hard_assignments(est.pi_i), est.pi_i.shape[1],
                               data.items, data.values)
    return pd.concat([user_table, item_table], ignore_index=True)
