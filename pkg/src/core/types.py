"""
Tipos de dominio compartidos por todos los módulos del modelo BM2.

Los objetos numéricos (datasets, bloques, estados variacionales) son
dataclasses inmutables con arreglos de solo lectura; las configuraciones
son modelos pydantic validados al construirse.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

SIMPLEX_TOL = 1e-10


def _frozen(array: np.ndarray, dtype=float) -> np.ndarray:
    values = np.array(array, dtype=dtype, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class RatingScale:
    """Niveles ordenados de calificación C_1 < C_2 < ... < C_S."""
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) < 2:
            raise ValueError("La escala necesita al menos dos niveles (S >= 2)")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"La escala debe ser estrictamente creciente: {values}")
        object.__setattr__(self, "values", values)

    @classmethod
    def integer(cls, low: int, high: int) -> "RatingScale":
        """Escala entera low..high (por ejemplo 1..5)."""
        return cls(tuple(range(low, high + 1)))

    @property
    def size(self) -> int:
        return len(self.values)

    @cached_property
    def array(self) -> np.ndarray:
        return _frozen(self.values)

    def level_of(self, value: float) -> int:
        """Índice s del valor C_s; ValueError si no pertenece a la escala."""
        try:
            return self.values.index(float(value))
        except ValueError:
            raise ValueError(f"La calificación {value} no pertenece a la escala {self.values}")

    def value_of(self, level: int) -> float:
        return self.values[level]

    def nearest_level(self, values: np.ndarray) -> np.ndarray:
        """Nivel más cercano para predicciones reales (empates al nivel menor)."""
        distances = np.abs(np.asarray(values, dtype=float)[..., None] - self.array)
        return np.argmin(distances, axis=-1)


@dataclass(frozen=True, eq=False)
class RatingDataset:
    """
    Almacén disperso de tripletas (usuario, ítem, nivel) observadas.

    Las calificaciones se guardan como índice de nivel s; el valor C_s solo se
    consulta en métricas y baselines.
    """
    n_users: int
    n_items: int
    scale: RatingScale
    users: np.ndarray
    items: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        users = _frozen(self.users, dtype=np.int64).reshape(-1)
        items = _frozen(self.items, dtype=np.int64).reshape(-1)
        levels = _frozen(self.levels, dtype=np.int64).reshape(-1)
        if not (len(users) == len(items) == len(levels)):
            raise ValueError("users, items y levels deben tener la misma longitud")
        if self.n_users < 0 or self.n_items < 0:
            raise ValueError("El número de usuarios e ítems no puede ser negativo")
        if len(users):
            if users.min() < 0 or users.max() >= self.n_users:
                raise ValueError(f"Índice de usuario fuera de rango [0, {self.n_users})")
            if items.min() < 0 or items.max() >= self.n_items:
                raise ValueError(f"Índice de ítem fuera de rango [0, {self.n_items})")
            if levels.min() < 0 or levels.max() >= self.scale.size:
                raise ValueError(f"Nivel de calificación fuera de rango [0, {self.scale.size})")
            keys = users * max(self.n_items, 1) + items
            if len(np.unique(keys)) != len(keys):
                raise ValueError("Hay pares (usuario, ítem) duplicados en el dataset")
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_triplets(cls, n_users: int, n_items: int, scale: RatingScale,
                      ratings: Iterable[Tuple[int, int, int]]) -> "RatingDataset":
        """Construye el dataset desde tripletas (i, j, s) con s índice de nivel."""
        rows = np.array(list(ratings), dtype=np.int64).reshape(-1, 3)
        return cls(n_users, n_items, scale, rows[:, 0], rows[:, 1], rows[:, 2])

    @classmethod
    def from_values(cls, n_users: int, n_items: int, scale: RatingScale,
                    ratings: Iterable[Tuple[int, int, float]]) -> "RatingDataset":
        """Construye el dataset desde tripletas (i, j, C_s) con el valor crudo."""
        triplets = [(i, j, scale.level_of(value)) for i, j, value in ratings]
        return cls.from_triplets(n_users, n_items, scale, triplets)

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def n_levels(self) -> int:
        return self.scale.size

    @cached_property
    def values(self) -> np.ndarray:
        """Valor C_s de cada calificación observada."""
        return _frozen(self.scale.array[self.levels])

    @cached_property
    def user_ratings(self) -> List[np.ndarray]:
        """U_i como posiciones de calificaciones de cada usuario."""
        return _group_positions(self.users, self.n_users)

    @cached_property
    def item_ratings(self) -> List[np.ndarray]:
        """I_j como posiciones de las calificaciones recibidas por cada ítem."""
        return _group_positions(self.items, self.n_items)

    def subset(self, positions: Sequence[int]) -> "RatingDataset":
        """Sub-dataset con las mismas dimensiones y escala."""
        idx = np.asarray(positions, dtype=np.int64)
        return RatingDataset(self.n_users, self.n_items, self.scale,
                             self.users[idx], self.items[idx], self.levels[idx])

    def level_histogram(self) -> np.ndarray:
        """Frecuencia empírica de cada nivel (ceros si no hay calificaciones)."""
        counts = np.bincount(self.levels, minlength=self.n_levels).astype(float)
        total = counts.sum()
        return counts / total if total > 0 else counts

    def triplets(self) -> List[Tuple[int, int, int]]:
        return list(zip(self.users.tolist(), self.items.tolist(), self.levels.tolist()))


def _group_positions(keys: np.ndarray, n_groups: int) -> List[np.ndarray]:
    order = np.argsort(keys, kind="stable")
    bounds = np.searchsorted(keys[order], np.arange(n_groups + 1))
    return [order[bounds[g]:bounds[g + 1]] for g in range(n_groups)]


class ModelConfig(BaseModel):
    """Configuración del modelo: número de clusters, hiperparámetros y control de convergencia."""
    model_config = ConfigDict(frozen=True)

    K: int = Field(..., ge=1, description="Número de clusters de usuarios")
    L: int = Field(..., ge=1, description="Número de clusters de ítems")
    alpha: List[float] = Field(..., description="Hiperparámetros Dirichlet de usuarios (K)")
    beta: List[float] = Field(..., description="Hiperparámetros Dirichlet de ítems (L)")
    max_iters: int = Field(500, ge=1, description="Máximo de iteraciones del EM variacional")
    rel_tol: float = Field(1e-6, gt=0, description="Umbral de cambio relativo del ELBO")
    seed: int = Field(0, description="Semilla del generador aleatorio")

    @model_validator(mode="after")
    def _check_hyperparameters(self) -> "ModelConfig":
        if len(self.alpha) != self.K:
            raise ValueError(f"alpha debe tener K={self.K} componentes, tiene {len(self.alpha)}")
        if len(self.beta) != self.L:
            raise ValueError(f"beta debe tener L={self.L} componentes, tiene {len(self.beta)}")
        if any(a <= 0 for a in self.alpha) or any(b <= 0 for b in self.beta):
            raise ValueError("Todos los hiperparámetros alpha y beta deben ser positivos")
        return self

    @classmethod
    def non_informative(cls, K: int, L: int, **kwargs) -> "ModelConfig":
        """Prior no informativo: alpha = (1/K, ..., 1/K) y beta = (1/L, ..., 1/L)."""
        return cls(K=K, L=L, alpha=[1.0 / K] * K, beta=[1.0 / L] * L, **kwargs)

    @property
    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=float)

    @property
    def beta_array(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=float)


@dataclass(frozen=True, eq=False)
class BlockArray:
    """Probabilidades por bloque mu[k, l, s]; cada fila (k, l, :) suma 1."""
    mu: np.ndarray

    def __post_init__(self):
        mu = _frozen(self.mu)
        if mu.ndim != 3:
            raise ValueError(f"mu debe ser un arreglo K x L x S, forma recibida {mu.shape}")
        if np.any(mu < 0):
            raise ValueError("mu no puede tener probabilidades negativas")
        if not np.allclose(mu.sum(axis=2), 1.0, rtol=0, atol=SIMPLEX_TOL):
            raise ValueError("Cada fila mu[k, l, :] debe sumar 1")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def from_unnormalized(cls, raw: np.ndarray) -> "BlockArray":
        """Normaliza cada vector (k, l, :) para que sume 1."""
        values = np.asarray(raw, dtype=float)
        return cls(values / values.sum(axis=2, keepdims=True))

    @classmethod
    def uniform(cls, K: int, L: int, S: int) -> "BlockArray":
        return cls(np.full((K, L, S), 1.0 / S))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.mu.shape


@dataclass(frozen=True, eq=False)
class VariationalState:
    """
    Parámetros variacionales libres: gamma_u (N x K), gamma_i (M x L) y, por
    cada calificación observada (en el orden del dataset), phi_u (K) y phi_i (L).
    """
    gamma_u: np.ndarray
    gamma_i: np.ndarray
    phi_u: np.ndarray
    phi_i: np.ndarray

    def __post_init__(self):
        for name in ("gamma_u", "gamma_i", "phi_u", "phi_i"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if len(self.phi_u) != len(self.phi_i):
            raise ValueError("phi_u y phi_i deben tener una fila por calificación observada")


@dataclass(frozen=True, eq=False)
class FitResult:
    """Resultado del ajuste: estado convergido, mu, traza del ELBO y diagnóstico."""
    state: VariationalState
    mu: BlockArray
    elbo_trace: List[float]
    n_iters: int
    converged: bool
    elapsed_seconds: float = 0.0
    config: Optional[ModelConfig] = field(default=None, compare=False)
