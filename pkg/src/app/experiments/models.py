from src.utils.compat import StrEnum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.app.baselines.models import NeighborConfig, PmfConfig
from src.app.inference.models import EngineOptions
from src.app.prediction.models import EvalReport


class Command(StrEnum):
    fit = "fit"
    predict = "predict"
    simulate = "simulate"
    cv = "cv"
    baseline = "baseline"
    bench = "bench"


class BaselineName(StrEnum):
    naive = "naive"
    user = "user-based"
    item = "item-based"
    pmf = "pmf"
    mmsbm = "mmsbm"


class ExperimentSpec(BaseModel):
    """Especificación completa de un experimento; los flags del CLI y el cuerpo HTTP la reflejan."""
    model_config = ConfigDict(protected_namespaces=())

    command: Command = Field(..., description="Comando a ejecutar")
    data_path: Optional[str] = Field(None, description="Archivo u.data de MovieLens")
    scenario: Optional[int] = Field(None, description="Escenario integrado K = L = 5, 7 o 9")
    scenario_path: Optional[str] = Field(None, description="Escenario exportado en texto plano")
    model_dir: Optional[str] = Field(None, description="Directorio de un modelo exportado (predict)")
    output_dir: str = Field("results", description="Directorio de artefactos")

    K: Optional[int] = Field(None, ge=1, description="Clusters de usuarios; por defecto el K del escenario o 10")
    L: Optional[int] = Field(None, ge=1, description="Clusters de ítems; por defecto el L del escenario o 10")
    alpha: Optional[List[float]] = Field(None, description="Hiperparámetros de usuarios; por defecto 1/K")
    beta: Optional[List[float]] = Field(None, description="Hiperparámetros de ítems; por defecto 1/L")
    informative_prior: bool = Field(False, description="Usar alpha/beta verdaderos del escenario")
    max_iters: int = Field(500, ge=1, description="Máximo de iteraciones del EM variacional")
    rel_tol: float = Field(1e-6, gt=0, description="Umbral de cambio relativo del ELBO")
    seed: int = Field(0, description="Semilla de ajuste y de generación")
    engine: EngineOptions = Field(default_factory=EngineOptions, description="Opciones del motor")

    train_fraction: float = Field(0.2, gt=0, lt=1, description="Fracción de entrenamiento de MovieLens")
    split_seed: int = Field(0, description="Semilla de la partición entrenamiento/oculto")
    eta: Optional[float] = Field(None, gt=0, le=1, description="Fracción observada del escenario")
    outlier_rate: Optional[float] = Field(None, ge=0, le=1, description="Tasa de outliers del escenario")

    baselines: List[BaselineName] = Field(default_factory=lambda: list(BaselineName),
                                          description="Baselines a ejecutar")
    round_baselines: bool = Field(False, description="Redondear predicciones reales a la escala")
    pmf: PmfConfig = Field(default_factory=PmfConfig, description="Configuración de PMF")
    neighbors: NeighborConfig = Field(default_factory=NeighborConfig, description="Configuración de vecindarios")

    candidates: List[Tuple[int, int]] = Field(default_factory=list, description="Candidatos (K, L) para cv")
    n_folds: int = Field(5, ge=2, description="Folds de la validación cruzada")
    cv_seeds: List[int] = Field(default_factory=lambda: [0], description="Semillas de partición de cv")
    n_jobs: int = Field(1, ge=1, description="Procesos en paralelo para cv")

    replicates: int = Field(1, ge=1, description="Réplicas independientes (bench)")
    etas: List[float] = Field(default_factory=list, description="Barrido de fracciones observadas (bench)")

    export_graph: bool = Field(False, description="Exportar la lista de aristas del grafo")
    graph_user_clusters: Optional[List[int]] = Field(None, description="Clusters de usuarios de la subred")
    graph_item_clusters: Optional[List[int]] = Field(None, description="Clusters de ítems de la subred")

    @model_validator(mode="after")
    def _check_sources(self) -> "ExperimentSpec":
        has_data = self.data_path is not None
        has_scenario = self.scenario is not None or self.scenario_path is not None
        if self.command == Command.predict and (self.model_dir is None or not has_data):
            raise ValueError("predict necesita model_dir y data_path")
        if self.command in (Command.simulate, Command.bench) and not has_scenario:
            raise ValueError(f"{self.command.value} necesita scenario o scenario_path")
        if self.command in (Command.fit, Command.cv, Command.baseline) and not (has_data or has_scenario):
            raise ValueError(f"{self.command.value} necesita data_path, scenario o scenario_path")
        if self.command == Command.cv and not self.candidates:
            raise ValueError("cv necesita al menos un candidato (K, L)")
        if any(not 0 < eta <= 1 for eta in self.etas):
            raise ValueError("Cada valor de etas debe estar en (0, 1]")
        return self


class ExperimentResponse(BaseModel):
    """Resultado de ejecutar un experimento."""
    success: bool = Field(..., description="Indica si la operación fue exitosa")
    command: str = Field(..., description="Comando ejecutado")
    message: str = Field("", description="Resumen legible")
    output_dir: Optional[str] = Field(None, description="Directorio con los artefactos")
    metrics: Dict[str, EvalReport] = Field(default={}, description="Métricas por modelo")
    details: Dict[str, Any] = Field(default={}, description="Información adicional del comando")
    error: Optional[str] = Field(None, description="Descripción del error")
    error_type: Optional[str] = Field(None, description="Tipo de excepción")
