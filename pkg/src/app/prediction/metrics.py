"""
Criterios de evaluación MAE, MSE y AR y su agregación entre réplicas.
"""
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .models import EvalReport

Triplet = Tuple[int, int, float]

_MAX_KEYS_IN_MESSAGE = 10


def _as_mapping(rows: Iterable[Triplet], name: str) -> Dict[Tuple[int, int], float]:
    mapping = {}
    for i, j, value in rows:
        key = (int(i), int(j))
        if key in mapping:
            raise ValueError(f"Par duplicado {key} en {name}")
        mapping[key] = float(value)
    return mapping


def _describe_keys(keys: List[Tuple[int, int]]) -> str:
    shown = ", ".join(str(k) for k in keys[:_MAX_KEYS_IN_MESSAGE])
    extra = len(keys) - _MAX_KEYS_IN_MESSAGE
    return shown + (f" (+{extra} más)" if extra > 0 else "")


def evaluate_arrays(predicted: Sequence[float], truth: Sequence[float]) -> EvalReport:
    """
    Calcula MAE, MSE y AR sobre arreglos alineados de valores de calificación.

    Raises:
        ValueError: Si las longitudes difieren o no hay nada que evaluar
    """
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.shape != truth.shape:
        raise ValueError(f"Predicciones ({predicted.shape}) y verdad ({truth.shape}) no están alineadas")
    if predicted.size == 0:
        raise ValueError("No hay calificaciones para evaluar")
    errors = predicted - truth
    return EvalReport(
        mae=float(np.mean(np.abs(errors))),
        mse=float(np.mean(errors ** 2)),
        ar=float(np.mean(predicted == truth)),
        n_evaluated=int(predicted.size),
    )


def evaluate(predictions: Iterable[Triplet], truth: Iterable[Triplet]) -> EvalReport:
    """
    Compara predicciones (i, j, y_hat) contra la verdad (i, j, y).

    Args:
        predictions: Tripletas predichas
        truth: Tripletas reales

    Returns:
        EvalReport con MAE, MSE y AR

    Raises:
        ValueError: Si los conjuntos de pares no coinciden (se listan los faltantes)
    """
    predicted = _as_mapping(predictions, "predicciones")
    actual = _as_mapping(truth, "verdad")
    missing_predictions = sorted(actual.keys() - predicted.keys())
    missing_truth = sorted(predicted.keys() - actual.keys())
    if missing_predictions or missing_truth:
        parts = []
        if missing_predictions:
            parts.append(f"sin predicción: {_describe_keys(missing_predictions)}")
        if missing_truth:
            parts.append(f"sin valor real: {_describe_keys(missing_truth)}")
        raise ValueError("Los pares evaluados no coinciden; " + "; ".join(parts))
    keys = sorted(actual)
    return evaluate_arrays([predicted[k] for k in keys], [actual[k] for k in keys])


def _standard_error(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


def aggregate_reports(reports: Sequence[EvalReport]) -> EvalReport:
    """Promedio de varias réplicas con error estándar (desviación muestral / raíz de n)."""
    if not reports:
        raise ValueError("No hay reportes para agregar")
    mae = np.array([r.mae for r in reports])
    mse = np.array([r.mse for r in reports])
    ar = np.array([r.ar for r in reports])
    return EvalReport(
        mae=float(mae.mean()),
        mse=float(mse.mean()),
        ar=float(ar.mean()),
        n_evaluated=int(sum(r.n_evaluated for r in reports)),
        n_runs=len(reports),
        mae_se=_standard_error(mae),
        mse_se=_standard_error(mse),
        ar_se=_standard_error(ar),
    )
