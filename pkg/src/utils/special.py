"""
Funciones especiales para las ecuaciones variacionales: digamma, log-gamma
y las utilidades f1/f2 de la distribución Dirichlet.

Se implementan aquí (recurrencia + serie asintótica) con precisión de 1e-10
en lugar de depender de una librería externa.
"""
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

# A partir de este umbral la serie asintótica ya converge a ~1e-13.
_DIGAMMA_SHIFT = 6.0
_LOG_GAMMA_SHIFT = 8.0

# Coeficientes B_2n / (2n) de la serie de digamma.
_DIGAMMA_SERIES = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

# Coeficientes B_2n / (2n (2n - 1)) de la serie de Stirling.
_STIRLING_SERIES = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
)

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _as_positive_array(x: ArrayLike, name: str) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if values.size and not np.all(values > 0):
        raise ValueError(f"{name} solo está definida para argumentos positivos: {x}")
    return values


def _restore_shape(values: np.ndarray, original: ArrayLike) -> ArrayLike:
    if np.ndim(original) == 0:
        return float(values)
    return values


def digamma(x: ArrayLike) -> ArrayLike:
    """
    Calcula psi(x) = d/dx log Gamma(x) para x > 0.

    Desplaza el argumento con psi(x) = psi(x + 1) - 1/x hasta superar el umbral
    y evalúa la expansión asintótica de De Moivre.

    Args:
        x: Escalar o arreglo de valores positivos

    Returns:
        psi(x) con la misma forma que la entrada

    Raises:
        ValueError: Si algún valor es <= 0
    """
    values = _as_positive_array(x, "digamma")
    shifted = values.copy()
    acc = np.zeros_like(shifted)

    small = shifted < _DIGAMMA_SHIFT
    while np.any(small):
        acc[small] -= 1.0 / shifted[small]
        shifted[small] += 1.0
        small = shifted < _DIGAMMA_SHIFT

    inv = 1.0 / shifted
    inv2 = inv * inv
    series = np.zeros_like(shifted)
    power = inv2.copy()
    for coef in _DIGAMMA_SERIES:
        series += coef * power
        power = power * inv2

    result = acc + np.log(shifted) - 0.5 * inv - series
    return _restore_shape(result, x)


def log_gamma(x: ArrayLike) -> ArrayLike:
    """
    Calcula log Gamma(x) para x > 0 con la serie de Stirling.

    Args:
        x: Escalar o arreglo de valores positivos

    Returns:
        log Gamma(x) con la misma forma que la entrada
    """
    values = _as_positive_array(x, "log_gamma")
    shifted = values.copy()
    log_prod = np.zeros_like(shifted)

    small = shifted < _LOG_GAMMA_SHIFT
    while np.any(small):
        log_prod[small] += np.log(shifted[small])
        shifted[small] += 1.0
        small = shifted < _LOG_GAMMA_SHIFT

    inv = 1.0 / shifted
    inv2 = inv * inv
    series = np.zeros_like(shifted)
    power = inv.copy()
    for coef in _STIRLING_SERIES:
        series += coef * power
        power = power * inv2

    result = (shifted - 0.5) * np.log(shifted) - shifted + _HALF_LOG_2PI + series - log_prod
    return _restore_shape(result, x)


def f1(x: np.ndarray) -> ArrayLike:
    """
    Logaritmo de la constante de normalización de una Dirichlet:
    log Gamma(sum_d x_d) - sum_d log Gamma(x_d).

    Con un arreglo 2D se evalúa por filas.
    """
    values = _as_positive_array(x, "f1")
    total = values.sum(axis=-1)
    return log_gamma(total) - np.sum(log_gamma(values), axis=-1)


def f2(x_d: float, x: np.ndarray) -> float:
    """Esperanza de log pi_d bajo Dirichlet(x): psi(x_d) - psi(sum_d x_d)."""
    values = _as_positive_array(x, "f2")
    if float(x_d) <= 0:
        raise ValueError(f"f2 solo está definida para argumentos positivos: {x_d}")
    return digamma(float(x_d)) - digamma(float(values.sum()))


def expected_log_dirichlet(gamma: np.ndarray) -> np.ndarray:
    """
    Versión vectorizada de f2: para cada fila gamma_i devuelve
    psi(gamma_ik) - psi(sum_k gamma_ik).

    Args:
        gamma: Arreglo (filas x D) de parámetros Dirichlet

    Returns:
        Arreglo de la misma forma con E[log pi]
    """
    values = _as_positive_array(gamma, "expected_log_dirichlet")
    return digamma(values) - digamma(values.sum(axis=-1, keepdims=True))
