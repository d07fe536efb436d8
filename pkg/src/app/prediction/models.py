from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from src.core.types import SIMPLEX_TOL


def _check_simplex_rows(values: np.ndarray, name: str) -> np.ndarray:
    rows = np.array(values, dtype=float, copy=True)
    if rows.ndim != 2:
        raise ValueError(f"{name} debe ser una matriz 2D, forma recibida {rows.shape}")
    if np.any(rows < 0) or not np.allclose(rows.sum(axis=1), 1.0, rtol=0, atol=SIMPLEX_TOL):
        raise ValueError(f"Cada fila de {name} debe estar en el símplex")
    rows.setflags(write=False)
    return rows


@dataclass(frozen=True, eq=False)
class MembershipEstimates:
    """Estimaciones puntuales de membresía: pi_u (N x K) y pi_i (M x L)."""
    pi_u: np.ndarray
    pi_i: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pi_u", _check_simplex_rows(self.pi_u, "pi_u"))
        object.__setattr__(self, "pi_i", _check_simplex_rows(self.pi_i, "pi_i"))

    @property
    def n_users(self) -> int:
        return self.pi_u.shape[0]

    @property
    def n_items(self) -> int:
        return self.pi_i.shape[0]


class EvalReport(BaseModel):
    """Métricas de evaluación sobre calificaciones ocultas."""
    mae: float = Field(..., ge=0, description="Error absoluto medio sobre valores C_s")
    mse: float = Field(..., ge=0, description="Error cuadrático medio")
    ar: float = Field(..., ge=0, le=1, description="Tasa de acierto exacto")
    n_evaluated: int = Field(..., ge=0, description="Número de calificaciones evaluadas")
    n_runs: int = Field(1, ge=1, description="Réplicas agregadas en este reporte")
    mae_se: Optional[float] = Field(None, ge=0, description="Error estándar del MAE entre réplicas")
    mse_se: Optional[float] = Field(None, ge=0, description="Error estándar del MSE entre réplicas")
    ar_se: Optional[float] = Field(None, ge=0, description="Error estándar del AR entre réplicas")
