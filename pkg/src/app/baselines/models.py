from dataclasses import dataclass
from src.utils.compat import StrEnum
from typing import List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.types import RatingScale


class Fallback(StrEnum):
    user_mean = "user-mean"
    global_mean = "global-mean"


class PmfConfig(BaseModel):
    """Configuración de la factorización de matrices probabilística."""
    model_config = ConfigDict(frozen=True)

    rank: int = Field(10, ge=1, description="Dimensión latente de los factores")
    learning_rate: float = Field(0.005, gt=0, description="Paso del descenso por gradiente")
    regularization: float = Field(0.05, ge=0, description="Penalización lambda sobre ||U||^2 + ||V||^2")
    max_epochs: int = Field(200, ge=1, description="Máximo de épocas")
    tol: float = Field(1e-6, gt=0, description="Cambio relativo del objetivo para detenerse")
    seed: int = Field(0, description="Semilla de la inicialización")


class NeighborConfig(BaseModel):
    """Configuración de los recomendadores por vecindario (coseno)."""
    model_config = ConfigDict(frozen=True)

    k_neighbors: Union[int, Literal["all"]] = Field("all", description="Vecinos a usar o 'all'")
    min_overlap: int = Field(1, ge=1, description="Mínimo de coordenadas co-calificadas")
    fallback: Fallback = Field(Fallback.user_mean, description="Predicción cuando ningún vecino califica")

    @field_validator("k_neighbors")
    @classmethod
    def _check_k_neighbors(cls, value):
        if value != "all" and value < 1:
            raise ValueError("k_neighbors debe ser >= 1 o 'all'")
        return value


class MmsbmConfig(BaseModel):
    """Configuración del modelo de bloques de membresía mixta ajustado por EM."""
    model_config = ConfigDict(frozen=True)

    K: int = Field(..., ge=1, description="Número de grupos de usuarios")
    L: int = Field(..., ge=1, description="Número de grupos de ítems")
    max_iters: int = Field(200, ge=1, description="Máximo de iteraciones EM")
    tol: float = Field(1e-6, gt=0, description="Cambio relativo de la log-verosimilitud para detenerse")
    seed: int = Field(0, description="Semilla de la inicialización")


@dataclass(frozen=True, eq=False)
class PmfFactors:
    """Factores ajustados: U (N x rank), V (M x rank) y la traza del objetivo."""
    user_factors: np.ndarray
    item_factors: np.ndarray
    scale: RatingScale
    objective_trace: List[float]
    n_epochs: int
    converged: bool


@dataclass(frozen=True, eq=False)
class MmsbmModel:
    """Membresías theta (N x K), eta (M x L) y probabilidades p[k, l, s]."""
    theta: np.ndarray
    eta: np.ndarray
    p: np.ndarray
    scale: RatingScale
    log_likelihood_trace: List[float]
    n_iters: int
    converged: bool
