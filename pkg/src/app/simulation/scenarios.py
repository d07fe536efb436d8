"""
Escenarios integrados K = L = 5, 7, 9 con N = 300 usuarios, M = 200 ítems y
S = 5 niveles.

Cada tabla guarda una matriz K x L por nivel de calificación: la entrada
[s][k][l] es la probabilidad de que un usuario del cluster k califique con
el nivel s a un ítem del cluster l. Los clusters de usuarios van de estricto
a generoso y los de ítems de peor a mejor calidad. Como las matrices
publicadas no siempre suman 1 sobre s, cada vector (k, l, :) se normaliza al
construir el escenario.
"""
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.core.types import BlockArray, ModelConfig
from .models import SimScenario

logger = logging.getLogger(__name__)

N_USERS = 300
N_ITEMS = 200

Matrix = Tuple[Tuple[float, ...], ...]

_MU_K5: Tuple[Matrix, ...] = (
    (
        (0.65, 0.45, 0.25, 0.15, 0.10),
        (0.45, 0.25, 0.05, 0.05, 0.05),
        (0.10, 0.10, 0.05, 0.05, 0.05),
        (0.10, 0.10, 0.02, 0.02, 0.02),
        (0.10, 0.12, 0.02, 0.02, 0.02),
    ),
    (
        (0.18, 0.28, 0.38, 0.28, 0.25),
        (0.28, 0.38, 0.48, 0.30, 0.20),
        (0.40, 0.20, 0.10, 0.10, 0.10),
        (0.35, 0.20, 0.05, 0.05, 0.05),
        (0.25, 0.15, 0.05, 0.05, 0.05),
    ),
    (
        (0.10, 0.28, 0.30, 0.30, 0.30),
        (0.20, 0.30, 0.40, 0.30, 0.30),
        (0.35, 0.45, 0.50, 0.30, 0.20),
        (0.30, 0.35, 0.40, 0.30, 0.20),
        (0.30, 0.30, 0.30, 0.20, 0.10),
    ),
    (
        (0.05, 0.05, 0.05, 0.25, 0.25),
        (0.05, 0.05, 0.05, 0.25, 0.35),
        (0.10, 0.20, 0.30, 0.40, 0.40),
        (0.20, 0.30, 0.48, 0.38, 0.28),
        (0.25, 0.28, 0.38, 0.28, 0.18),
    ),
    (
        (0.02, 0.02, 0.02, 0.10, 0.10),
        (0.02, 0.02, 0.02, 0.10, 0.10),
        (0.05, 0.05, 0.05, 0.15, 0.25),
        (0.05, 0.05, 0.05, 0.25, 0.45),
        (0.10, 0.15, 0.25, 0.45, 0.65),
    ),
)

_MU_K7: Tuple[Matrix, ...] = (
    (
        (0.65, 0.55, 0.45, 0.35, 0.25, 0.15, 0.10),
        (0.45, 0.35, 0.25, 0.15, 0.05, 0.05, 0.05),
        (0.25, 0.20, 0.15, 0.10, 0.05, 0.05, 0.05),
        (0.10, 0.10, 0.10, 0.05, 0.05, 0.05, 0.05),
        (0.10, 0.10, 0.10, 0.05, 0.05, 0.05, 0.05),
        (0.10, 0.10, 0.02, 0.02, 0.02, 0.02, 0.02),
        (0.10, 0.10, 0.06, 0.06, 0.02, 0.02, 0.02),
    ),
    (
        (0.18, 0.23, 0.28, 0.33, 0.38, 0.28, 0.25),
        (0.28, 0.33, 0.38, 0.43, 0.48, 0.30, 0.25),
        (0.45, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20),
        (0.40, 0.30, 0.20, 0.10, 0.10, 0.10, 0.10),
        (0.35, 0.25, 0.15, 0.05, 0.05, 0.05, 0.10),
        (0.35, 0.20, 0.05, 0.05, 0.05, 0.05, 0.05),
        (0.25, 0.20, 0.15, 0.10, 0.05, 0.05, 0.05),
    ),
    (
        (0.10, 0.15, 0.20, 0.25, 0.30, 0.30, 0.30),
        (0.20, 0.25, 0.30, 0.35, 0.40, 0.30, 0.35),
        (0.15, 0.20, 0.30, 0.40, 0.45, 0.40, 0.35),
        (0.35, 0.40, 0.45, 0.50, 0.40, 0.30, 0.20),
        (0.40, 0.45, 0.40, 0.40, 0.35, 0.30, 0.25),
        (0.30, 0.35, 0.40, 0.35, 0.30, 0.25, 0.20),
        (0.30, 0.35, 0.35, 0.30, 0.30, 0.20, 0.10),
    ),
    (
        (0.05, 0.05, 0.05, 0.05, 0.05, 0.20, 0.25),
        (0.05, 0.05, 0.05, 0.05, 0.05, 0.25, 0.25),
        (0.10, 0.10, 0.10, 0.10, 0.15, 0.20, 0.30),
        (0.10, 0.15, 0.20, 0.30, 0.35, 0.40, 0.40),
        (0.10, 0.15, 0.30, 0.40, 0.45, 0.40, 0.40),
        (0.20, 0.30, 0.48, 0.43, 0.38, 0.33, 0.28),
        (0.25, 0.25, 0.29, 0.34, 0.38, 0.28, 0.18),
    ),
    (
        (0.02, 0.02, 0.02, 0.02, 0.02, 0.07, 0.10),
        (0.02, 0.02, 0.02, 0.02, 0.02, 0.10, 0.10),
        (0.05, 0.05, 0.05, 0.05, 0.05, 0.10, 0.10),
        (0.05, 0.05, 0.05, 0.05, 0.10, 0.15, 0.25),
        (0.05, 0.05, 0.05, 0.10, 0.10, 0.20, 0.20),
        (0.05, 0.05, 0.05, 0.15, 0.25, 0.35, 0.45),
        (0.10, 0.10, 0.15, 0.20, 0.25, 0.45, 0.65),
    ),
)

# El cuarto nivel publicado para K = 9 trae solo 8 filas; la novena se completa
# repitiendo la octava en _padded.
_MU_K9: Tuple[Matrix, ...] = (
    (
        (0.70, 0.65, 0.55, 0.45, 0.35, 0.25, 0.15, 0.10, 0.10),
        (0.55, 0.45, 0.35, 0.25, 0.15, 0.05, 0.05, 0.05, 0.05),
        (0.40, 0.30, 0.20, 0.10, 0.10, 0.05, 0.05, 0.05, 0.05),
        (0.25, 0.15, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05),
        (0.10, 0.10, 0.10, 0.10, 0.05, 0.05, 0.05, 0.05, 0.05),
        (0.10, 0.10, 0.10, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02),
        (0.10, 0.10, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02),
        (0.10, 0.10, 0.10, 0.06, 0.06, 0.02, 0.02, 0.02, 0.02),
        (0.05, 0.05, 0.05, 0.02, 0.02, 0.02, 0.02, 0.02, 0.02),
    ),
    (
        (0.15, 0.18, 0.23, 0.28, 0.33, 0.38, 0.28, 0.25, 0.20),
        (0.23, 0.28, 0.33, 0.38, 0.43, 0.48, 0.30, 0.20, 0.15),
        (0.31, 0.36, 0.41, 0.46, 0.36, 0.31, 0.21, 0.21, 0.21),
        (0.41, 0.41, 0.41, 0.36, 0.31, 0.26, 0.16, 0.11, 0.11),
        (0.50, 0.40, 0.30, 0.20, 0.10, 0.10, 0.10, 0.10, 0.10),
        (0.40, 0.35, 0.20, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05),
        (0.35, 0.20, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05),
        (0.30, 0.25, 0.20, 0.15, 0.10, 0.05, 0.05, 0.05, 0.05),
        (0.25, 0.15, 0.15, 0.08, 0.08, 0.08, 0.03, 0.03, 0.03),
    ),
    (
        (0.08, 0.10, 0.15, 0.20, 0.25, 0.30, 0.30, 0.30, 0.30),
        (0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.30, 0.30, 0.35),
        (0.22, 0.27, 0.32, 0.37, 0.42, 0.47, 0.42, 0.32, 0.27),
        (0.27, 0.32, 0.37, 0.42, 0.47, 0.52, 0.42, 0.32, 0.27),
        (0.30, 0.35, 0.40, 0.45, 0.50, 0.40, 0.30, 0.20, 0.15),
        (0.35, 0.30, 0.35, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15),
        (0.30, 0.35, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10),
        (0.30, 0.30, 0.35, 0.35, 0.30, 0.30, 0.20, 0.10, 0.10),
        (0.40, 0.50, 0.40, 0.30, 0.30, 0.20, 0.10, 0.05, 0.05),
    ),
    (
        (0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.20, 0.25, 0.30),
        (0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.25, 0.35, 0.35),
        (0.05, 0.05, 0.15, 0.15, 0.15, 0.15, 0.30, 0.35, 0.40),
        (0.05, 0.10, 0.15, 0.20, 0.30, 0.35, 0.40, 0.40, 0.40),
        (0.10, 0.20, 0.30, 0.48, 0.43, 0.38, 0.33, 0.28, 0.28),
        (0.20, 0.30, 0.48, 0.43, 0.38, 0.33, 0.28, 0.28, 0.28),
        (0.20, 0.25, 0.25, 0.29, 0.34, 0.38, 0.28, 0.18, 0.13),
        (0.20, 0.20, 0.30, 0.40, 0.30, 0.40, 0.40, 0.25, 0.15),
    ),
    (
        (0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.07, 0.10, 0.10),
        (0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.10, 0.10, 0.10),
        (0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.07, 0.07, 0.07),
        (0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.07, 0.17, 0.17),
        (0.05, 0.05, 0.05, 0.05, 0.05, 0.10, 0.15, 0.25, 0.30),
        (0.05, 0.05, 0.05, 0.05, 0.15, 0.25, 0.35, 0.45, 0.50),
        (0.05, 0.05, 0.05, 0.15, 0.25, 0.35, 0.45, 0.50, 0.55),
        (0.10, 0.10, 0.10, 0.15, 0.20, 0.25, 0.45, 0.65, 0.70),
        (0.10, 0.10, 0.10, 0.20, 0.30, 0.30, 0.45, 0.65, 0.75),
    ),
)

_PRIORS: Dict[int, Tuple[Tuple[float, ...], Tuple[float, ...]]] = {
    5: (
        (0.10, 0.20, 0.40, 0.20, 0.10),
        (0.10, 0.15, 0.45, 0.25, 0.05),
    ),
    7: (
        (0.07, 0.11, 0.17, 0.30, 0.17, 0.11, 0.07),
        (0.07, 0.10, 0.15, 0.41, 0.14, 0.08, 0.05),
    ),
    9: (
        (0.02, 0.05, 0.12, 0.16, 0.30, 0.12, 0.15, 0.05, 0.03),
        (0.03, 0.05, 0.12, 0.17, 0.30, 0.14, 0.12, 0.07, 0.03),
    ),
}

_TABLES: Dict[int, Tuple[Matrix, ...]] = {5: _MU_K5, 7: _MU_K7, 9: _MU_K9}

SUPPORTED_SIZES = tuple(sorted(_TABLES))


def _padded(matrix: Matrix, k: int) -> Tuple[List[List[float]], bool]:
    rows = [list(row) for row in matrix]
    padded = False
    while len(rows) < k:
        rows.append(list(rows[-1]))
        padded = True
    return rows, padded


def raw_tables(k: int) -> np.ndarray:
    """
    Matrices publicadas sin normalizar, apiladas como arreglo (S x K x L).

    Raises:
        ValueError: Si k no es 5, 7 o 9
    """
    if k not in _TABLES:
        raise ValueError(f"Escenario no soportado K = L = {k}; opciones: {SUPPORTED_SIZES}")
    return np.array([_padded(matrix, k)[0] for matrix in _TABLES[k]], dtype=float)


def builtin_scenario(k: int, eta: float = 0.2, outlier_rate: float = 0.10, seed: int = 0,
                     **options) -> SimScenario:
    """
    Construye el escenario integrado de tamaño k con los bloques normalizados
    y los alpha/beta verdaderos.

    Args:
        k: 5, 7 o 9
        eta: Fracción de pares observados
        outlier_rate: Fracción de calificaciones extremas invertidas
        seed: Semilla de la generación
        **options: delta_mode, masking u otros campos de SimScenario

    Returns:
        SimScenario con N = 300, M = 200 y S = 5

    Raises:
        ValueError: Si k no es 5, 7 o 9
    """
    tables = raw_tables(k)
    notes: Sequence[str] = tuple(
        f"mu{s + 1}: fila {k} replicada de la fila {len(matrix)}"
        for s, matrix in enumerate(_TABLES[k]) if len(matrix) < k
    )
    for note in notes:
        logger.warning(f"Escenario K = L = {k}: {note}")

    alpha, beta = _PRIORS[k]
    mu = BlockArray.from_unnormalized(np.transpose(tables, (1, 2, 0)))
    return SimScenario(
        n_users=N_USERS,
        n_items=N_ITEMS,
        alpha=alpha,
        beta=beta,
        mu=mu,
        eta=eta,
        outlier_rate=outlier_rate,
        seed=seed,
        notes=tuple(notes),
        **options,
    )


def with_prior(scenario: SimScenario, **kwargs) -> ModelConfig:
    """
    Configuración con el prior informativo: alpha y beta verdaderos del
    escenario y K, L iguales a los del escenario.

    Args:
        scenario: Escenario de referencia
        **kwargs: max_iters, rel_tol o seed
    """
    return ModelConfig(K=scenario.K, L=scenario.L, alpha=list(scenario.alpha),
                       beta=list(scenario.beta), **kwargs)
