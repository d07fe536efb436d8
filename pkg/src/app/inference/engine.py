"""
Motor del EM variacional para el modelo de bloques bipartito de membresía mixta.

Cada iteración sigue el orden del algoritmo: phi_u (con phi_i anterior),
phi_i (con phi_u nuevo), gamma y finalmente mu. Todas las actualizaciones
están vectorizadas sobre las calificaciones observadas.
"""
import logging
import time
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from src.core.types import BlockArray, FitResult, ModelConfig, RatingDataset, VariationalState
from src.utils.special import expected_log_dirichlet, f1
from .models import EngineOptions, InitStrategy

DEFAULT_FLOOR = 1e-10
_TINY = np.finfo(float).tiny


def _normalize_rows(weights: np.ndarray) -> np.ndarray:
    return weights / weights.sum(axis=1, keepdims=True)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return _normalize_rows(np.exp(shifted))


def _log_mu(mu: BlockArray, floor: float) -> np.ndarray:
    return np.log(np.maximum(mu.mu, floor))


def _check_dimensions(data: RatingDataset, config: ModelConfig, mu: Optional[BlockArray] = None):
    if mu is not None and mu.shape != (config.K, config.L, data.n_levels):
        raise ValueError(
            f"mu tiene forma {mu.shape}, se esperaba {(config.K, config.L, data.n_levels)}"
        )


def init_state(data: RatingDataset, config: ModelConfig,
               opts: Optional[EngineOptions] = None) -> Tuple[VariationalState, BlockArray]:
    """
    Inicializa phi, gamma y mu de forma autoconsistente.

    phi parte uniforme con ruido multiplicativo (o de una Dirichlet(1)),
    gamma = hiperparámetro + sumas de phi, y mu replica el histograma global
    de niveles en todos los bloques con el mismo ruido.

    Args:
        data: Calificaciones observadas
        config: Configuración del modelo (K, L, alpha, beta, seed)
        opts: Opciones del motor

    Returns:
        Tupla (estado variacional, mu inicial)
    """
    opts = opts or EngineOptions()
    rng = np.random.default_rng(config.seed)
    n_ratings, K, L, S = len(data), config.K, config.L, data.n_levels
    low, high = 1.0 - opts.jitter_scale, 1.0 + opts.jitter_scale

    if opts.init_strategy == InitStrategy.dirichlet:
        phi_u = rng.dirichlet(np.ones(K), size=n_ratings) if K > 1 else np.ones((n_ratings, 1))
        phi_i = rng.dirichlet(np.ones(L), size=n_ratings) if L > 1 else np.ones((n_ratings, 1))
    else:
        phi_u = _normalize_rows(rng.uniform(low, high, size=(n_ratings, K)))
        phi_i = _normalize_rows(rng.uniform(low, high, size=(n_ratings, L)))

    gamma_u, gamma_i = _gamma_from_phi(data, phi_u, phi_i, config)
    state = VariationalState(gamma_u, gamma_i, phi_u, phi_i)

    histogram = data.level_histogram()
    if histogram.sum() == 0:
        histogram = np.full(S, 1.0 / S)
    raw_mu = histogram[None, None, :] * rng.uniform(low, high, size=(K, L, S))
    return state, BlockArray.from_unnormalized(raw_mu)


def update_phi_u(data: RatingDataset, state: VariationalState, mu: BlockArray,
                 config: ModelConfig, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """
    phi_u[r, k] ∝ exp{ f2(gamma_u[i, k], gamma_u[i]) + sum_l phi_i[r, l] log mu[k, l, s_r] }.

    Returns:
        Arreglo (R x K) con cada fila en el símplex
    """
    log_mu = _log_mu(mu, floor)
    expected = np.zeros((len(data), config.K))
    for s in range(data.n_levels):
        mask = data.levels == s
        if np.any(mask):
            expected[mask] = state.phi_i[mask] @ log_mu[:, :, s].T
    logits = expected_log_dirichlet(state.gamma_u)[data.users] + expected
    return _softmax_rows(logits)


def update_phi_i(data: RatingDataset, state: VariationalState, mu: BlockArray,
                 config: ModelConfig, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """
    phi_i[r, l] ∝ exp{ f2(gamma_i[j, l], gamma_i[j]) + sum_k phi_u[r, k] log mu[k, l, s_r] }.

    Returns:
        Arreglo (R x L) con cada fila en el símplex
    """
    log_mu = _log_mu(mu, floor)
    expected = np.zeros((len(data), config.L))
    for s in range(data.n_levels):
        mask = data.levels == s
        if np.any(mask):
            expected[mask] = state.phi_u[mask] @ log_mu[:, :, s]
    logits = expected_log_dirichlet(state.gamma_i)[data.items] + expected
    return _softmax_rows(logits)


def _gamma_from_phi(data: RatingDataset, phi_u: np.ndarray, phi_i: np.ndarray,
                    config: ModelConfig) -> Tuple[np.ndarray, np.ndarray]:
    gamma_u = np.tile(config.alpha_array, (data.n_users, 1))
    gamma_i = np.tile(config.beta_array, (data.n_items, 1))
    np.add.at(gamma_u, data.users, phi_u)
    np.add.at(gamma_i, data.items, phi_i)
    return gamma_u, gamma_i


def update_gamma(data: RatingDataset, state: VariationalState,
                 config: ModelConfig) -> Tuple[np.ndarray, np.ndarray]:
    """gamma_u[i] = alpha + sum_{j en U_i} phi_u; gamma_i[j] = beta + sum_{i en I_j} phi_i."""
    return _gamma_from_phi(data, state.phi_u, state.phi_i, config)


def _block_counts(data: RatingDataset, state: VariationalState, config: ModelConfig) -> np.ndarray:
    counts = np.zeros((config.K, config.L, data.n_levels))
    for s in range(data.n_levels):
        mask = data.levels == s
        if np.any(mask):
            counts[:, :, s] = state.phi_u[mask].T @ state.phi_i[mask]
    return counts


def update_mu(data: RatingDataset, state: VariationalState, config: ModelConfig,
              logger: Optional[logging.Logger] = None) -> BlockArray:
    """
    M-step: mu[k, l, s] = sum phi_u phi_i 1(s_r = s) / sum phi_u phi_i.

    Los bloques sin masa de responsabilidad vuelven a la uniforme 1/S.
    """
    counts = _block_counts(data, state, config)
    totals = counts.sum(axis=2, keepdims=True)
    empty = totals[..., 0] <= 0
    mu = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    if np.any(empty):
        blocks = [tuple(int(x) for x in kl) for kl in np.argwhere(empty)]
        (logger or logging.getLogger(__name__)).warning(
            f"{len(blocks)} bloques de mu sin responsabilidad se reinician a la uniforme: {blocks[:10]}"
        )
    mu[empty] = 1.0 / data.n_levels
    return BlockArray(mu)


def elbo(data: RatingDataset, state: VariationalState, mu: BlockArray,
         config: ModelConfig, floor: float = DEFAULT_FLOOR) -> float:
    """
    Evalúa el ELBO como suma de cuatro términos: constante de los
    hiperparámetros, términos en gamma (incluida la constante de las
    Dirichlet variacionales), términos phi-gamma con entropía de phi, y el
    término de verosimilitud phi-mu.
    """
    alpha, beta = config.alpha_array, config.beta_array
    elog_u = expected_log_dirichlet(state.gamma_u)
    elog_i = expected_log_dirichlet(state.gamma_i)

    l_c = data.n_users * f1(alpha) + data.n_items * f1(beta)

    l_gamma = float(np.sum((alpha - state.gamma_u) * elog_u) + np.sum((beta - state.gamma_i) * elog_i))
    if data.n_users:
        l_gamma -= float(np.sum(f1(state.gamma_u)))
    if data.n_items:
        l_gamma -= float(np.sum(f1(state.gamma_i)))

    phi_u, phi_i = state.phi_u, state.phi_i
    l_phi_gamma = float(
        np.sum(phi_u * (elog_u[data.users] - np.log(np.maximum(phi_u, floor))))
        + np.sum(phi_i * (elog_i[data.items] - np.log(np.maximum(phi_i, floor))))
    )

    l_phi_mu = float(np.sum(_block_counts(data, state, config) * _log_mu(mu, floor)))

    return float(l_c) + l_gamma + l_phi_gamma + l_phi_mu


def iterate(data: RatingDataset, state: VariationalState, mu: BlockArray, config: ModelConfig,
            floor: float = DEFAULT_FLOOR,
            logger: Optional[logging.Logger] = None) -> Tuple[VariationalState, BlockArray]:
    """Un barrido completo: phi_u, phi_i, gamma y mu."""
    state = replace(state, phi_u=update_phi_u(data, state, mu, config, floor))
    state = replace(state, phi_i=update_phi_i(data, state, mu, config, floor))
    gamma_u, gamma_i = update_gamma(data, state, config)
    state = replace(state, gamma_u=gamma_u, gamma_i=gamma_i)
    return state, update_mu(data, state, config, logger)


def parameter_change(before: Tuple[VariationalState, BlockArray],
                     after: Tuple[VariationalState, BlockArray]) -> float:
    """Máximo cambio absoluto entre dos estados sobre phi_u, phi_i, gamma_u, gamma_i y mu."""
    (old, old_mu), (new, new_mu) = before, after
    pairs = [
        (old.phi_u, new.phi_u), (old.phi_i, new.phi_i),
        (old.gamma_u, new.gamma_u), (old.gamma_i, new.gamma_i),
        (old_mu.mu, new_mu.mu),
    ]
    return max((float(np.max(np.abs(a - b))) for a, b in pairs if a.size), default=0.0)


def fit(data: RatingDataset, config: ModelConfig, opts: Optional[EngineOptions] = None,
        warm_start: Optional[Tuple[VariationalState, BlockArray]] = None,
        logger: Optional[logging.Logger] = None) -> FitResult:
    """
    Ejecuta el EM variacional hasta que el cambio relativo del ELBO sea menor
    que rel_tol y ningún parámetro se mueva más de param_tol en un barrido,
    o hasta alcanzar max_iters.

    Args:
        data: Calificaciones observadas (no vacío)
        config: Configuración del modelo
        opts: Opciones del motor
        warm_start: Estado y mu iniciales opcionales
        logger: Logger para registrar el progreso

    Returns:
        FitResult con el estado final, mu, la traza del ELBO y diagnóstico

    Raises:
        ValueError: Si no hay calificaciones observadas
        FloatingPointError: Si el ELBO deja de ser finito
    """
    logger = logger or logging.getLogger(__name__)
    opts = opts or EngineOptions()
    if len(data) == 0:
        raise ValueError("No se puede ajustar el modelo sin calificaciones observadas")

    start = time.perf_counter()
    state, mu = warm_start if warm_start is not None else init_state(data, config, opts)
    _check_dimensions(data, config, mu)

    trace = []
    converged = False
    previous = None
    iteration = 0
    for iteration in range(1, config.max_iters + 1):
        before = (state, mu)
        state, mu = iterate(data, state, mu, config, opts.min_prob_floor, logger)
        if iteration % opts.elbo_check_every != 0 and iteration != config.max_iters:
            continue

        value = elbo(data, state, mu, config, opts.min_prob_floor)
        if not np.isfinite(value):
            logger.error(f"ELBO no finito en la iteración {iteration}: {value}")
            raise FloatingPointError(f"ELBO no finito ({value}) en la iteración {iteration}")
        trace.append(value)
        change = parameter_change(before, (state, mu))
        logger.debug(f"Iteración {iteration}: ELBO = {value:.6f}, cambio máximo = {change:.3e}")

        # Un ELBO exactamente 0 (K = L = 1 con un único nivel) también debe poder converger.
        if previous is not None \
                and abs(value - previous) <= config.rel_tol * max(abs(previous), _TINY) \
                and change < opts.param_tol:
            converged = True
            break
        previous = value

    elapsed = time.perf_counter() - start
    logger.info(
        f"EM variacional K={config.K}, L={config.L}: {iteration} iteraciones, "
        f"convergió={converged}, ELBO={trace[-1]:.4f}, {elapsed:.2f}s"
    )
    return FitResult(state=state, mu=mu, elbo_trace=trace, n_iters=iteration,
                     converged=converged, elapsed_seconds=elapsed, config=config)


class VariationalEngine:
    """
    Motor de inferencia con logger inyectado; envuelve init_state/iterate/fit
    con unas opciones fijas.
    """

    def __init__(self, opts: Optional[EngineOptions] = None, logger: Optional[logging.Logger] = None):
        self.opts = opts or EngineOptions()
        self.logger = logger or logging.getLogger(__name__)

    def fit(self, data: RatingDataset, config: ModelConfig,
            warm_start: Optional[Tuple[VariationalState, BlockArray]] = None) -> FitResult:
        self.logger.info(f"Ajustando BM2 sobre {len(data)} calificaciones ({data.n_users} usuarios, {data.n_items} ítems)")
        return fit(data, config, self.opts, warm_start=warm_start, logger=self.logger)

    def iterate(self, data: RatingDataset, result: FitResult) -> Tuple[VariationalState, BlockArray]:
        """Barrido adicional sobre un resultado ya ajustado."""
        return iterate(data, result.state, result.mu, result.config, self.opts.min_prob_floor, self.logger)

    def elbo(self, data: RatingDataset, state: VariationalState, mu: BlockArray, config: ModelConfig) -> float:
        return elbo(data, state, mu, config, self.opts.min_prob_floor)
