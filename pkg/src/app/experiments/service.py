import logging
import time
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from fastapi import Depends

from src.app.baselines.mmsbm import mmsbm_fit, mmsbm_predict_many
from src.app.baselines.models import MmsbmConfig
from src.app.baselines.naive import NaiveRecommender, round_predictions
from src.app.baselines.neighbors import ItemBasedRecommender, UserBasedRecommender
from src.app.baselines.pmf import pmf_fit, pmf_predict_many
from src.app.inference.engine import VariationalEngine
from src.app.prediction.metrics import aggregate_reports, evaluate_arrays
from src.app.prediction.models import EvalReport
from src.app.prediction.predictor import cluster_summary, estimate_memberships, hard_assignments, predict_many
from src.app.selection.models import CvPlan
from src.app.selection.service import cross_validate
from src.app.simulation.generator import generate
from src.app.simulation.models import SimOutput, SimScenario
from src.app.simulation.scenario_io import export_scenario, import_scenario
from src.app.simulation.scenarios import builtin_scenario, with_prior
from src.container import logger_dependency
from src.core.types import ModelConfig, RatingDataset
from src.database.artifacts import ArtifactStore
from src.database.movielens import IdMapping, load_movielens, read_ratings_frame, split_train_hidden, write_ratings
from .models import BaselineName, Command, ExperimentSpec

DEFAULT_CLUSTERS = 10
BENCH_MODELS = ("MMSBM", "BM2", "BM2*")


@dataclass(frozen=True, eq=False)
class _Split:
    """Calificaciones de entrenamiento y ocultas con su origen."""
    train: RatingDataset
    hidden: RatingDataset
    mapping: IdMapping
    scenario: Optional[SimScenario] = None
    output: Optional[SimOutput] = None


class ExperimentService:
    """
    Orquesta los comandos de experimentación (fit, predict, simulate, cv,
    baseline, bench) y escribe sus artefactos en spec.output_dir.

    Cada comando devuelve un diccionario con success, message, metrics y
    details; los errores se registran y se devuelven con success = False.
    """

    def __init__(self, logger: logging.Logger):
        """Constructor con inyección de dependencias."""
        self.logger = logger

    def run(self, spec: ExperimentSpec) -> Dict[str, Any]:
        """
        Ejecuta el comando indicado en la especificación.

        Args:
            spec: Especificación validada del experimento

        Returns:
            Dict[str, Any]: Resultado con métricas, detalles o el error ocurrido
        """
        handlers: Dict[Command, Callable[[ExperimentSpec, ArtifactStore], Dict[str, Any]]] = {
            Command.fit: self.fit,
            Command.predict: self.predict,
            Command.simulate: self.simulate,
            Command.cv: self.cross_validation,
            Command.baseline: self.baseline,
            Command.bench: self.bench,
        }
        try:
            self.logger.info(f"Iniciando comando '{spec.command.value}' (salida: {spec.output_dir})")
            store = ArtifactStore(spec.output_dir, self.logger)
            result = handlers[spec.command](spec, store)
            self.logger.info(f"Comando '{spec.command.value}' completado: {result['message']}")
            return {
                "success": True,
                "command": spec.command.value,
                "output_dir": spec.output_dir,
                **result,
            }
        except Exception as e:
            error_msg = f"Error en el comando '{spec.command.value}': {str(e)}"
            self.logger.error(error_msg)
            return {
                "success": False,
                "command": spec.command.value,
                "output_dir": spec.output_dir,
                "error": error_msg,
                "error_type": type(e).__name__,
            }

    # --- Fuentes de datos ---------------------------------------------------

    def _scenario(self, spec: ExperimentSpec) -> SimScenario:
        if spec.scenario_path is not None:
            scenario = import_scenario(spec.scenario_path)
        else:
            scenario = builtin_scenario(spec.scenario)
        changes: Dict[str, Any] = {"seed": spec.seed}
        if spec.eta is not None:
            changes["eta"] = spec.eta
        if spec.outlier_rate is not None:
            changes["outlier_rate"] = spec.outlier_rate
        return scenario.with_options(**changes)

    def _load(self, spec: ExperimentSpec) -> _Split:
        """MovieLens con partición aleatoria, o un escenario generado (observadas / ocultas)."""
        if spec.data_path is not None:
            data, mapping = load_movielens(spec.data_path, logger=self.logger)
            train, hidden = split_train_hidden(data, spec.train_fraction, spec.split_seed)
            self.logger.info(f"Partición: {len(train)} de entrenamiento, {len(hidden)} ocultas")
            return _Split(train, hidden, mapping)

        scenario = self._scenario(spec)
        output = generate(scenario, self.logger)
        mapping = IdMapping.identity(scenario.n_users, scenario.n_items)
        return _Split(output.observed, output.hidden, mapping, scenario, output)

    @staticmethod
    def _clusters(spec: ExperimentSpec, scenario: Optional[SimScenario]) -> Tuple[int, int]:
        K = spec.K or (scenario.K if scenario else DEFAULT_CLUSTERS)
        L = spec.L or (scenario.L if scenario else DEFAULT_CLUSTERS)
        return K, L

    def _model_config(self, spec: ExperimentSpec, scenario: Optional[SimScenario],
                      K: int, L: int, informative: bool) -> ModelConfig:
        """
        Prior no informativo por defecto; alpha/beta explícitos si se dan; con
        informative los alpha/beta verdaderos del escenario.

        Raises:
            ValueError: Si se pide el prior informativo sin escenario o con otro (K, L)
        """
        control = {"max_iters": spec.max_iters, "rel_tol": spec.rel_tol, "seed": spec.seed}
        if informative:
            if scenario is None:
                raise ValueError("El prior informativo necesita un escenario con alpha/beta verdaderos")
            if (K, L) != (scenario.K, scenario.L):
                raise ValueError(
                    f"El prior informativo exige K={scenario.K}, L={scenario.L}; se pidió K={K}, L={L}"
                )
            return with_prior(scenario, **control)
        if spec.alpha is not None or spec.beta is not None:
            return ModelConfig(
                K=K, L=L,
                alpha=spec.alpha if spec.alpha is not None else [1.0 / K] * K,
                beta=spec.beta if spec.beta is not None else [1.0 / L] * L,
                **control,
            )
        return ModelConfig.non_informative(K, L, **control)

    # --- Comandos -----------------------------------------------------------

    def fit(self, spec: ExperimentSpec, store: ArtifactStore) -> Dict[str, Any]:
        """
        Ajusta BM2 (o BM2* con prior informativo), exporta el modelo y evalúa
        sobre las calificaciones ocultas si las hay.
        """
        split = self._load(spec)
        K, L = self._clusters(spec, split.scenario)
        config = self._model_config(spec, split.scenario, K, L, spec.informative_prior)
        engine = VariationalEngine(spec.engine, self.logger)
        result = engine.fit(split.train, config)
        est = estimate_memberships(result)

        store.write_model(result.mu, est, split.train.scale, split.mapping)
        store.write_elbo_trace(result.elbo_trace)
        store.write_cluster_summary(cluster_summary(split.train, est))

        metrics: Dict[str, EvalReport] = {}
        name = "BM2*" if spec.informative_prior else "BM2"
        if len(split.hidden) > 0:
            hidden = split.hidden
            predicted = hidden.scale.array[predict_many(est, result.mu, hidden.users, hidden.items)]
            metrics[name] = evaluate_arrays(predicted, hidden.values)
            store.write_predictions(hidden.users, hidden.items, predicted, truth=hidden.values,
                                    mapping=split.mapping)
            store.write_metrics(metrics)
        else:
            self.logger.warning("No hay calificaciones ocultas; se omite la evaluación")

        if spec.export_graph:
            store.write_graph_edges(split.train, split.mapping,
                                    hard_assignments(est.pi_u), hard_assignments(est.pi_i),
                                    spec.graph_user_clusters, spec.graph_item_clusters)

        message = f"{name} K={K}, L={L}: {result.n_iters} iteraciones, convergió={result.converged}"
        if name in metrics:
            message += f", MAE={metrics[name].mae:.4f}"
        return {
            "message": message,
            "metrics": metrics,
            "details": {
                "K": K,
                "L": L,
                "n_train": len(split.train),
                "n_hidden": len(split.hidden),
                "n_iters": result.n_iters,
                "converged": result.converged,
                "final_elbo": result.elbo_trace[-1],
                "elapsed_seconds": result.elapsed_seconds,
            },
        }

    def predict(self, spec: ExperimentSpec, store: ArtifactStore) -> Dict[str, Any]:
        """
        Predice las calificaciones de un archivo u.data con un modelo exportado.
        Las columnas de calificación del archivo se usan como verdad para las métricas.

        Raises:
            ValueError: Si el archivo menciona usuarios o ítems desconocidos para el modelo
        """
        mu, est, scale, mapping = ArtifactStore(spec.model_dir, self.logger).load_model()
        frame = read_ratings_frame(spec.data_path)

        unknown_users = sorted(set(frame["user_id"].tolist()) - set(mapping.user_ids))
        unknown_items = sorted(set(frame["item_id"].tolist()) - set(mapping.item_ids))
        if unknown_users or unknown_items:
            raise ValueError(
                f"Identificadores desconocidos para el modelo: usuarios {unknown_users[:10]}, "
                f"ítems {unknown_items[:10]}"
            )

        users = np.array([mapping.user_index[u] for u in frame["user_id"].tolist()], dtype=np.int64)
        items = np.array([mapping.item_index[j] for j in frame["item_id"].tolist()], dtype=np.int64)
        predicted = scale.array[predict_many(est, mu, users, items)]
        truth = frame["rating"].to_numpy(dtype=float)

        store.write_predictions(users, items, predicted, truth=truth, mapping=mapping)
        metrics = {"BM2": evaluate_arrays(predicted, truth)}
        store.write_metrics(metrics)
        return {
            "message": f"{len(predicted)} predicciones, MAE={metrics['BM2'].mae:.4f}",
            "metrics": metrics,
            "details": {"n_predicted": len(predicted), "model_dir": spec.model_dir},
        }

    def simulate(self, spec: ExperimentSpec, store: ArtifactStore) -> Dict[str, Any]:
        """Genera un escenario y exporta observadas, ocultas, el escenario y la verdad de clusters."""
        scenario = self._scenario(spec)
        output = generate(scenario, self.logger)

        write_ratings(output.observed, store.path("observed.data"))
        write_ratings(output.hidden, store.path("hidden.data"))
        export_scenario(scenario, store.path("scenario.txt"))
        store.write_table("true_user_clusters", pd.DataFrame({
            "user_id": np.arange(1, scenario.n_users + 1),
            "cluster": output.true_user_clusters + 1,
        }))
        store.write_table("true_item_clusters", pd.DataFrame({
            "item_id": np.arange(1, scenario.n_items + 1),
            "cluster": output.true_item_clusters + 1,
        }))

        outliers = asdict(output.outliers)
        return {
            "message": f"{len(output.observed)} observadas, {len(output.hidden)} ocultas",
            "details": {
                "K": scenario.K,
                "L": scenario.L,
                "n_observed": len(output.observed),
                "n_hidden": len(output.hidden),
                "outliers": outliers,
                "notes": list(scenario.notes),
            },
        }

    def cross_validation(self, spec: ExperimentSpec, store: ArtifactStore) -> Dict[str, Any]:
        """Validación cruzada sobre las calificaciones de entrenamiento (u observadas)."""
        split = self._load(spec)
        plan = CvPlan(n_folds=spec.n_folds, candidates=spec.candidates,
                      replicate_seeds=spec.cv_seeds, n_jobs=spec.n_jobs)
        template = ModelConfig.non_informative(1, 1, max_iters=spec.max_iters,
                                               rel_tol=spec.rel_tol, seed=spec.seed)
        report = cross_validate(split.train, plan, template, spec.engine, self.logger)
        store.write_cv_report(report)

        K, L = report.selected
        return {
            "message": f"Candidato elegido K={K}, L={L}",
            "details": {
                "selected": [K, L],
                "summary": [s.model_dump() for s in report.summary],
            },
        }

    def _baseline_predictions(self, name: BaselineName, spec: ExperimentSpec, split: _Split) -> np.ndarray:
        train, hidden = split.train, split.hidden
        if name == BaselineName.naive:
            return NaiveRecommender(train).predict_many(hidden.users, hidden.items)
        if name == BaselineName.user:
            return UserBasedRecommender(train, spec.neighbors, self.logger).predict_many(hidden.users, hidden.items)
        if name == BaselineName.item:
            return ItemBasedRecommender(train, spec.neighbors, self.logger).predict_many(hidden.users, hidden.items)
        if name == BaselineName.pmf:
            return pmf_predict_many(pmf_fit(train, spec.pmf, self.logger), hidden.users, hidden.items)
        K, L = self._clusters(spec, split.scenario)
        model = mmsbm_fit(train, MmsbmConfig(K=K, L=L, max_iters=spec.max_iters, seed=spec.seed), self.logger)
        return mmsbm_predict_many(model, hidden.users, hidden.items)

    def baseline(self, spec: ExperimentSpec, store: ArtifactStore) -> Dict[str, Any]:
        """
        Evalúa los baselines pedidos sobre las calificaciones ocultas. Con
        round_baselines las predicciones reales se llevan al valor de escala
        más cercano.
        """
        split = self._load(spec)
        metrics: Dict[str, EvalReport] = {}
        timings: Dict[str, float] = {}
        for name in spec.baselines:
            start = time.perf_counter()
            predicted = self._baseline_predictions(name, spec, split)
            if spec.round_baselines:
                predicted = round_predictions(predicted, split.train.scale)
            timings[name.value] = time.perf_counter() - start
            metrics[name.value] = evaluate_arrays(predicted, split.hidden.values)
            self.logger.info(f"Baseline {name.value}: MAE={metrics[name.value].mae:.4f} "
                             f"({timings[name.value]:.2f}s)")

        store.write_metrics(metrics, name="baseline_metrics")
        best = min(metrics, key=lambda model: metrics[model].mae)
        return {
            "message": f"{len(metrics)} baselines evaluados; menor MAE: {best}",
            "metrics": metrics,
            "details": {"seconds": timings, "rounded": spec.round_baselines},
        }

    def _bench_replicate(self, spec: ExperimentSpec, scenario: SimScenario) -> Dict[str, Tuple[EvalReport, float]]:
        output = generate(scenario, self.logger)
        train, hidden = output.observed, output.hidden
        engine = VariationalEngine(spec.engine, self.logger)
        runs: Dict[str, Tuple[EvalReport, float]] = {}

        start = time.perf_counter()
        model = mmsbm_fit(train, MmsbmConfig(K=scenario.K, L=scenario.L, max_iters=spec.max_iters,
                                             seed=scenario.seed), self.logger)
        predicted = mmsbm_predict_many(model, hidden.users, hidden.items)
        runs["MMSBM"] = (evaluate_arrays(predicted, hidden.values), time.perf_counter() - start)

        for name, informative in (("BM2", False), ("BM2*", True)):
            start = time.perf_counter()
            config = self._model_config(spec.model_copy(update={"seed": scenario.seed}), scenario,
                                        scenario.K, scenario.L, informative)
            result = engine.fit(train, config)
            est = estimate_memberships(result)
            predicted = hidden.scale.array[predict_many(est, result.mu, hidden.users, hidden.items)]
            runs[name] = (evaluate_arrays(predicted, hidden.values), time.perf_counter() - start)
        return runs

    def bench(self, spec: ExperimentSpec, store: ArtifactStore) -> Dict[str, Any]:
        """
        Compara MMSBM, BM2 y BM2* sobre réplicas independientes del escenario
        (semillas seed, seed + 1, ...) para cada eta del barrido. Las métricas
        se promedian con su error estándar.
        """
        base = self._scenario(spec)
        etas: List[float] = spec.etas or [base.eta]
        rows = []
        metrics: Dict[str, EvalReport] = {}
        for eta in etas:
            reports: Dict[str, List[EvalReport]] = {name: [] for name in BENCH_MODELS}
            seconds: Dict[str, List[float]] = {name: [] for name in BENCH_MODELS}
            for r in range(spec.replicates):
                scenario = base.with_options(eta=eta, seed=base.seed + r)
                self.logger.info(f"Bench eta={eta}: réplica {r + 1}/{spec.replicates}")
                for name, (report, elapsed) in self._bench_replicate(spec, scenario).items():
                    reports[name].append(report)
                    seconds[name].append(elapsed)

            for name in BENCH_MODELS:
                aggregated = aggregate_reports(reports[name])
                key = name if len(etas) == 1 else f"{name}@eta={eta:g}"
                metrics[key] = aggregated
                rows.append({"eta": eta, "model": name, **aggregated.model_dump(),
                             "mean_seconds": float(np.mean(seconds[name]))})

        store.write_table("bench", pd.DataFrame(rows), text=True)
        store.write_metrics(metrics, name="bench_metrics")
        return {
            "message": f"Bench K=L={base.K}: {len(etas)} valores de eta x {spec.replicates} réplicas",
            "metrics": metrics,
            "details": {"etas": etas, "replicates": spec.replicates, "rows": rows},
        }


# Factory function para el servicio usando FastAPI Depends
def get_experiment_service(
    logger: logging.Logger = Depends(logger_dependency)
) -> ExperimentService:
    """Crea ExperimentService con el logger compartido de la aplicación."""
    return ExperimentService(logger=logger)


# Factory function para uso fuera de FastAPI (CLI, testing, etc.)
def create_experiment_service() -> ExperimentService:
    """Crea ExperimentService fuera del contexto de FastAPI."""
    from src.container import get_logger

    return ExperimentService(logger=get_logger())
