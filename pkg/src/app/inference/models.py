from src.utils.compat import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class InitStrategy(StrEnum):
    uniform = "uniform-plus-jitter"
    dirichlet = "random-dirichlet"


class EngineOptions(BaseModel):
    """Opciones del motor variacional (inicialización y estabilidad numérica)."""
    model_config = ConfigDict(frozen=True)

    init_strategy: InitStrategy = Field(InitStrategy.uniform, description="Estrategia de inicialización de phi")
    jitter_scale: float = Field(0.1, gt=0, lt=0.5, description="Ruido multiplicativo U(1-j, 1+j) de la inicialización")
    min_prob_floor: float = Field(1e-10, gt=0, le=1e-3, description="Piso de probabilidad antes de tomar logaritmos")
    elbo_check_every: int = Field(1, ge=1, description="Cada cuántas iteraciones se evalúa el ELBO")
    param_tol: float = Field(1e-7, gt=0, description="Cambio máximo de phi, gamma y mu entre barridos para declarar convergencia")
