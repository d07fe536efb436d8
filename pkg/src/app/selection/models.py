from typing import List, Literal, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field


class CvPlan(BaseModel):
    """Plan de validación cruzada sobre candidatos (K, L)."""
    model_config = ConfigDict(frozen=True)

    n_folds: int = Field(5, ge=2, description="Número de folds")
    candidates: List[Tuple[int, int]] = Field(..., min_length=1, description="Candidatos (K, L)")
    replicate_seeds: List[int] = Field(default=[0], min_length=1, description="Semillas de partición por réplica")
    metric: Literal["mae"] = Field("mae", description="Criterio de selección")
    n_jobs: int = Field(1, ge=1, description="Procesos para ajustar candidato x fold en paralelo")


class CvFoldResult(BaseModel):
    K: int
    L: int
    replicate: int
    fold: int
    mae: float


class CvCandidateSummary(BaseModel):
    K: int
    L: int
    mean_mae: float
    fold_maes: List[float]
    selected: bool = False


class CvReport(BaseModel):
    """Tabla de resultados por fold, resumen por candidato y candidato elegido."""
    folds: List[CvFoldResult]
    summary: List[CvCandidateSummary]
    selected: Tuple[int, int]

    def fold_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.folds],
                            columns=["K", "L", "replicate", "fold", "mae"])

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"K": s.K, "L": s.L, "mean_mae": s.mean_mae, "selected": s.selected} for s in self.summary],
            columns=["K", "L", "mean_mae", "selected"],
        )
