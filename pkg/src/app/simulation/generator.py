"""
Generador de datasets sintéticos: membresías duras desde alpha/beta,
calificaciones desde mu, inyección de outliers y enmascarado con eta.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from src.core.types import RatingDataset
from .models import DeltaMode, MaskingMode, OutlierReport, SimOutput, SimScenario


def round_half_up(value: float) -> int:
    return int(np.floor(value + 0.5))


def exact_marginal(scenario: SimScenario) -> np.ndarray:
    """
    Distribución marginal exacta de niveles sin outliers:
    sum_k sum_l alpha_k mu[k, l, :] beta_l con alpha y beta normalizados.
    """
    return np.einsum("k,kls,l->s", scenario.alpha_probs, scenario.mu.mu, scenario.beta_probs)


def sample_levels(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Un nivel por fila de probabilidades (último eje) por inversión de la CDF."""
    cdf = np.cumsum(probs, axis=-1)
    draws = rng.random(probs.shape[:-1])
    levels = np.sum(draws[..., None] >= cdf, axis=-1)
    return np.minimum(levels, probs.shape[-1] - 1)


def _flip(levels: np.ndarray, eligible: np.ndarray, target: int, rate: float,
          rng: np.random.Generator) -> int:
    candidates = np.flatnonzero(eligible)
    n_flip = min(round_half_up(rate * len(candidates)), len(candidates))
    if n_flip:
        chosen = rng.choice(candidates, size=n_flip, replace=False)
        levels.flat[chosen] = target
    return n_flip


def inject_outliers(levels: np.ndarray, z_users: np.ndarray, z_items: np.ndarray,
                    K: int, L: int, S: int, rate: float,
                    rng: np.random.Generator) -> OutlierReport:
    """
    Invierte calificaciones extremas en el lugar.

    Entre los pares (cluster de usuarios más generoso, mejor cluster de ítems)
    calificados con el nivel máximo se pasa una fracción `rate` al nivel
    mínimo; simétricamente, los niveles mínimos del cluster más estricto sobre
    el peor cluster de ítems pasan al máximo. Ambos conjuntos elegibles se
    calculan antes de modificar nada y de cada uno se invierten exactamente
    round(rate * elegibles) calificaciones.

    Args:
        levels: Matriz N x M de niveles (se modifica)
        z_users: Cluster verdadero de cada usuario
        z_items: Cluster verdadero de cada ítem
        K: Número de clusters de usuarios
        L: Número de clusters de ítems
        S: Número de niveles
        rate: Fracción a invertir
        rng: Generador aleatorio

    Returns:
        OutlierReport con elegibles e invertidos en cada dirección
    """
    top, bottom = S - 1, 0
    eligible_high = ((z_users[:, None] == K - 1) & (z_items[None, :] == L - 1)
                     & (levels == top))
    eligible_low = ((z_users[:, None] == 0) & (z_items[None, :] == 0)
                    & (levels == bottom))

    flipped_high = _flip(levels, eligible_high, bottom, rate, rng)
    flipped_low = _flip(levels, eligible_low, top, rate, rng)
    return OutlierReport(
        eligible_high=int(eligible_high.sum()),
        flipped_high=flipped_high,
        eligible_low=int(eligible_low.sum()),
        flipped_low=flipped_low,
    )


def observation_mask(shape: Tuple[int, int], eta: float, mode: MaskingMode,
                     rng: np.random.Generator) -> np.ndarray:
    """Pares observados: Bernoulli(eta) independiente o exactamente round(eta * N * M)."""
    if mode == MaskingMode.exact:
        total = shape[0] * shape[1]
        observed = np.zeros(total, dtype=bool)
        n_observed = min(round_half_up(eta * total), total)
        observed[rng.choice(total, size=n_observed, replace=False)] = True
        return observed.reshape(shape)
    return rng.random(shape) < eta


def _dataset(scenario: SimScenario, levels: np.ndarray, mask: np.ndarray) -> RatingDataset:
    users, items = np.nonzero(mask)
    return RatingDataset(scenario.n_users, scenario.n_items, scenario.scale,
                         users, items, levels[users, items])


def generate(scenario: SimScenario, logger: Optional[logging.Logger] = None) -> SimOutput:
    """
    Genera un dataset completo N x M y lo divide en observado y oculto.

    Todo el azar sale de un único generador sembrado con scenario.seed.

    Args:
        scenario: Escenario validado
        logger: Logger opcional

    Returns:
        SimOutput con ambas particiones, clusters verdaderos, la matriz
        completa de niveles y el conteo de outliers
    """
    logger = logger or logging.getLogger(__name__)
    rng = np.random.default_rng(scenario.seed)
    N, M, K, L, S = scenario.n_users, scenario.n_items, scenario.K, scenario.L, scenario.S

    z_users = rng.choice(K, size=N, p=scenario.alpha_probs)
    z_items = rng.choice(L, size=M, p=scenario.beta_probs)

    if scenario.delta_mode == DeltaMode.global_:
        probs = np.broadcast_to(exact_marginal(scenario), (N, M, S))
    else:
        probs = scenario.mu.mu[z_users[:, None], z_items[None, :]]
    levels = sample_levels(probs, rng)

    outliers = inject_outliers(levels, z_users, z_items, K, L, S, scenario.outlier_rate, rng)
    mask = observation_mask((N, M), scenario.eta, scenario.masking, rng)

    observed = _dataset(scenario, levels, mask)
    hidden = _dataset(scenario, levels, ~mask)
    logger.info(
        f"Escenario K={K}, L={L} (seed={scenario.seed}): {len(observed)} observadas, "
        f"{len(hidden)} ocultas, outliers {outliers.flipped_high}/{outliers.eligible_high} "
        f"y {outliers.flipped_low}/{outliers.eligible_low}"
    )
    levels.setflags(write=False)
    z_users.setflags(write=False)
    z_items.setflags(write=False)
    return SimOutput(observed, hidden, z_users, z_items, levels, outliers)
