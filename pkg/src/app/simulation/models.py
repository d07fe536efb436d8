from dataclasses import dataclass, field, replace
from src.utils.compat import StrEnum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.core.types import BlockArray, RatingDataset, RatingScale


class DeltaMode(StrEnum):
    per_pair = "per-pair"
    global_ = "global"


class MaskingMode(StrEnum):
    bernoulli = "bernoulli"
    exact = "exact"


def _probabilities(values, name: str) -> Tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if not values or any(v <= 0 for v in values):
        raise ValueError(f"{name} debe tener componentes positivos")
    return values


@dataclass(frozen=True, eq=False)
class SimScenario:
    """
    Parámetros de un escenario sintético: dimensiones, probabilidades de
    cluster alpha/beta, bloques mu (K x L x S), fracción observada eta y
    tasa de outliers.
    """
    n_users: int
    n_items: int
    alpha: Tuple[float, ...]
    beta: Tuple[float, ...]
    mu: BlockArray
    eta: float = 0.2
    outlier_rate: float = 0.10
    seed: int = 0
    delta_mode: DeltaMode = DeltaMode.per_pair
    masking: MaskingMode = MaskingMode.bernoulli
    scale: Optional[RatingScale] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "alpha", _probabilities(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _probabilities(self.beta, "beta"))
        object.__setattr__(self, "delta_mode", DeltaMode(self.delta_mode))
        object.__setattr__(self, "masking", MaskingMode(self.masking))
        object.__setattr__(self, "notes", tuple(self.notes))
        if self.scale is None:
            object.__setattr__(self, "scale", RatingScale.integer(1, self.S))
        if self.n_users < 1 or self.n_items < 1:
            raise ValueError("El escenario necesita al menos un usuario y un ítem")
        if (self.K, self.L) != (len(self.alpha), len(self.beta)):
            raise ValueError(
                f"mu es {self.mu.shape} pero alpha/beta tienen {len(self.alpha)}/{len(self.beta)} componentes"
            )
        if self.scale.size != self.S:
            raise ValueError(f"La escala tiene {self.scale.size} niveles y mu {self.S}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta debe estar en (0, 1], recibido {self.eta}")
        if not 0 <= self.outlier_rate <= 1:
            raise ValueError(f"outlier_rate debe estar en [0, 1], recibido {self.outlier_rate}")

    @property
    def K(self) -> int:
        return self.mu.shape[0]

    @property
    def L(self) -> int:
        return self.mu.shape[1]

    @property
    def S(self) -> int:
        return self.mu.shape[2]

    @property
    def alpha_probs(self) -> np.ndarray:
        values = np.asarray(self.alpha)
        return values / values.sum()

    @property
    def beta_probs(self) -> np.ndarray:
        values = np.asarray(self.beta)
        return values / values.sum()

    def with_options(self, **changes) -> "SimScenario":
        """Copia del escenario con campos reemplazados (eta, seed, outlier_rate, ...)."""
        return replace(self, **changes)


@dataclass(frozen=True)
class OutlierReport:
    eligible_high: int
    flipped_high: int
    eligible_low: int
    flipped_low: int


@dataclass(frozen=True, eq=False)
class SimOutput:
    """Calificaciones observadas y ocultas junto con la verdad de clusters."""
    observed: RatingDataset
    hidden: RatingDataset
    true_user_clusters: np.ndarray
    true_item_clusters: np.ndarray
    levels: np.ndarray
    outliers: OutlierReport


class ScenarioSummary(BaseModel):
    """Descripción serializable de un escenario integrado."""
    k: int = Field(..., description="Tamaño del escenario (K = L)")
    n_users: int = Field(..., description="Número de usuarios N")
    n_items: int = Field(..., description="Número de ítems M")
    S: int = Field(..., description="Número de niveles de calificación")
    alpha: List[float] = Field(..., description="Probabilidades verdaderas de cluster de usuarios")
    beta: List[float] = Field(..., description="Probabilidades verdaderas de cluster de ítems")
    eta: float = Field(..., description="Fracción observada por defecto")
    outlier_rate: float = Field(..., description="Tasa de outliers por defecto")
    mu: List[List[List[float]]] = Field(..., description="Bloques normalizados mu[k][l][s]")
    notes: List[str] = Field(default=[], description="Observaciones sobre la transcripción")
