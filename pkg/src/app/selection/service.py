"""
Selección del número de clusters por validación cruzada k-fold con MAE.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from src.app.inference.engine import fit
from src.app.inference.models import EngineOptions
from src.app.prediction.metrics import evaluate_arrays
from src.app.prediction.predictor import estimate_memberships, predict_many
from src.app.simulation.generator import generate
from src.app.simulation.models import SimScenario
from src.core.types import ModelConfig, RatingDataset
from .models import CvCandidateSummary, CvFoldResult, CvPlan, CvReport

FoldPair = Tuple[RatingDataset, RatingDataset]


def split_folds(data: RatingDataset, n_folds: int, seed: int) -> List[FoldPair]:
    """
    Parte las calificaciones en n_folds conjuntos disjuntos de tamaño casi igual.

    Returns:
        Lista de pares (entrenamiento, prueba); el par f usa el fold f como prueba

    Raises:
        ValueError: Si hay menos calificaciones que folds
    """
    if n_folds < 2:
        raise ValueError(f"Se necesitan al menos 2 folds, se pidieron {n_folds}")
    if len(data) < n_folds:
        raise ValueError(f"Hay {len(data)} calificaciones, insuficientes para {n_folds} folds")
    order = np.random.default_rng(seed).permutation(len(data))
    folds = np.array_split(order, n_folds)
    pairs = []
    for f, test_positions in enumerate(folds):
        train_positions = np.concatenate([fold for g, fold in enumerate(folds) if g != f])
        pairs.append((data.subset(np.sort(train_positions)), data.subset(np.sort(test_positions))))
    return pairs


def candidate_config(template: ModelConfig, K: int, L: int) -> ModelConfig:
    """Configuración no informativa para (K, L) con el control de convergencia del template."""
    return ModelConfig.non_informative(K, L, max_iters=template.max_iters,
                                       rel_tol=template.rel_tol, seed=template.seed)


def fold_mae(train: RatingDataset, test: RatingDataset, config: ModelConfig,
             opts: Optional[EngineOptions] = None) -> float:
    """Ajusta sobre train y devuelve el MAE de las predicciones MAP sobre test."""
    result = fit(train, config, opts)
    est = estimate_memberships(result)
    levels = predict_many(est, result.mu, test.users, test.items)
    return evaluate_arrays(test.scale.array[levels], test.values).mae


def _run_task(K: int, L: int, replicate: int, fold: int, train: RatingDataset, test: RatingDataset,
              config: ModelConfig, opts: Optional[EngineOptions]) -> CvFoldResult:
    try:
        mae = fold_mae(train, test, config, opts)
    except Exception as e:
        raise RuntimeError(f"Falló el ajuste del candidato (K={K}, L={L}) en el fold {fold} "
                           f"(réplica {replicate}): {e}") from e
    return CvFoldResult(K=K, L=L, replicate=replicate, fold=fold, mae=mae)


def cross_validate(data: RatingDataset, plan: CvPlan, template: ModelConfig,
                   opts: Optional[EngineOptions] = None,
                   logger: Optional[logging.Logger] = None) -> CvReport:
    """
    Evalúa cada candidato en cada fold de cada réplica y elige el de menor MAE
    medio. Los empates se resuelven hacia menor K + L y después menor K.

    Args:
        data: Calificaciones disponibles
        plan: Plan de validación cruzada
        template: Configuración de la que se toman max_iters, rel_tol y seed
        opts: Opciones del motor
        logger: Logger opcional

    Returns:
        CvReport con resultados por fold, resumen y candidato elegido

    Raises:
        RuntimeError: Si un ajuste falla (se indica candidato y fold)
    """
    logger = logger or logging.getLogger(__name__)
    tasks = []
    for replicate, seed in enumerate(plan.replicate_seeds):
        pairs = split_folds(data, plan.n_folds, seed)
        for K, L in plan.candidates:
            config = candidate_config(template, K, L)
            for fold, (train, test) in enumerate(pairs):
                tasks.append((K, L, replicate, fold, train, test, config, opts))

    logger.info(f"Validación cruzada: {len(plan.candidates)} candidatos, {plan.n_folds} folds, "
                f"{len(plan.replicate_seeds)} réplicas ({len(tasks)} ajustes, n_jobs={plan.n_jobs})")
    if plan.n_jobs > 1:
        results = Parallel(n_jobs=plan.n_jobs)(delayed(_run_task)(*task) for task in tasks)
    else:
        results = [_run_task(*task) for task in tasks]

    summary = []
    for K, L in plan.candidates:
        maes = [r.mae for r in results if (r.K, r.L) == (K, L)]
        summary.append(CvCandidateSummary(K=K, L=L, mean_mae=float(np.mean(maes)), fold_maes=maes))

    best = min(summary, key=lambda s: (s.mean_mae, s.K + s.L, s.K))
    for s in summary:
        s.selected = (s.K, s.L) == (best.K, best.L)
    logger.info(f"Candidato elegido: K={best.K}, L={best.L} (MAE medio {best.mean_mae:.4f})")
    return CvReport(folds=list(results), summary=summary, selected=(best.K, best.L))


def selection_frequencies(scenario: SimScenario, plan: CvPlan, template: ModelConfig,
                          n_replicates: int, opts: Optional[EngineOptions] = None,
                          logger: Optional[logging.Logger] = None) -> Dict[Tuple[int, int], int]:
    """
    Cuenta cuántas veces se elige cada candidato sobre réplicas independientes
    del escenario (semillas scenario.seed, scenario.seed + 1, ...). La
    validación cruzada usa las calificaciones observadas de cada réplica.
    """
    logger = logger or logging.getLogger(__name__)
    counts = {tuple(candidate): 0 for candidate in plan.candidates}
    for r in range(n_replicates):
        output = generate(scenario.with_options(seed=scenario.seed + r), logger)
        report = cross_validate(output.observed, plan, template, opts, logger)
        counts[report.selected] += 1
    logger.info(f"Frecuencias de selección sobre {n_replicates} réplicas: {counts}")
    return counts
