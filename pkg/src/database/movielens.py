"""
Lectura y escritura de calificaciones en formato MovieLens u.data:
líneas `usuario<TAB>ítem<TAB>calificación<TAB>timestamp`.
"""
import logging
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.types import RatingDataset, RatingScale

_COLUMNS = ["user_id", "item_id", "rating", "timestamp"]


@dataclass(frozen=True)
class IdMapping:
    """Identificadores originales de cada índice denso de usuario e ítem."""
    user_ids: Tuple[int, ...]
    item_ids: Tuple[int, ...]

    @cached_property
    def user_index(self) -> Dict[int, int]:
        return {original: index for index, original in enumerate(self.user_ids)}

    @cached_property
    def item_index(self) -> Dict[int, int]:
        return {original: index for index, original in enumerate(self.item_ids)}

    @classmethod
    def identity(cls, n_users: int, n_items: int) -> "IdMapping":
        """Mapeo índice -> índice + 1, como en los datos sintéticos exportados."""
        return cls(tuple(range(1, n_users + 1)), tuple(range(1, n_items + 1)))


def _format_value(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.17g}"


def read_ratings_frame(path: str) -> pd.DataFrame:
    """
    Lee y valida las cuatro columnas de un archivo u.data.

    Returns:
        DataFrame con user_id, item_id (enteros), rating (real) y line (número de línea)

    Raises:
        FileNotFoundError: Si el archivo no existe
        ValueError: Si está vacío o alguna línea es inválida (se indica la línea)
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"No se encontró el archivo de calificaciones: {path}")

    try:
        raw = pd.read_csv(path, sep="\t", header=None, dtype=str, skip_blank_lines=False,
                          keep_default_na=False).fillna("")
    except pd.errors.EmptyDataError:
        raise ValueError(f"El archivo {path} no contiene calificaciones")
    except pd.errors.ParserError as e:
        raise ValueError(f"Línea mal formada en {path}: {e}")

    raw["line"] = np.arange(1, len(raw) + 1)
    raw = raw[~(raw.drop(columns="line") == "").all(axis=1)]
    if raw.empty:
        raise ValueError(f"El archivo {path} no contiene calificaciones")
    if raw.shape[1] - 1 != len(_COLUMNS):
        line = int(raw["line"].iloc[0])
        raise ValueError(
            f"Línea {line} de {path}: se esperaban {len(_COLUMNS)} columnas separadas por tabulador, "
            f"se encontraron {raw.shape[1] - 1}"
        )
    raw.columns = _COLUMNS + ["line"]

    frame = pd.DataFrame({
        "user_id": pd.to_numeric(raw["user_id"].str.strip(), errors="coerce"),
        "item_id": pd.to_numeric(raw["item_id"].str.strip(), errors="coerce"),
        "rating": pd.to_numeric(raw["rating"].str.strip(), errors="coerce"),
        "line": raw["line"],
    })
    ids_ok = (frame[["user_id", "item_id"]].notna().all(axis=1)
              & (frame["user_id"] % 1 == 0) & (frame["item_id"] % 1 == 0))
    bad = ~(ids_ok & np.isfinite(frame["rating"]) & (raw["timestamp"].str.strip() != ""))
    if bad.any():
        line = int(frame.loc[bad, "line"].iloc[0])
        raise ValueError(f"Línea {line} de {path} mal formada: se esperaba 'usuario\\títem\\tcalificación\\ttimestamp'")

    frame["user_id"] = frame["user_id"].astype(np.int64)
    frame["item_id"] = frame["item_id"].astype(np.int64)
    return frame.reset_index(drop=True)


def load_movielens(path: str, scale: Optional[RatingScale] = None,
                   logger: Optional[logging.Logger] = None) -> Tuple[RatingDataset, IdMapping]:
    """
    Carga un archivo u.data y remapea usuarios e ítems a índices densos.

    Los identificadores se ordenan de menor a mayor antes de asignar índices.
    La escala se infiere como los valores distintos observados, ordenados, salvo
    que se indique una. Los pares (usuario, ítem) repetidos conservan la última
    línea.

    Args:
        path: Ruta del archivo
        scale: Escala explícita opcional
        logger: Logger opcional

    Returns:
        Tupla (dataset, mapeo de identificadores)
    """
    logger = logger or logging.getLogger(__name__)
    frame = read_ratings_frame(path)

    duplicated = frame.duplicated(subset=["user_id", "item_id"], keep="last")
    if duplicated.any():
        logger.warning(f"{int(duplicated.sum())} pares (usuario, ítem) repetidos en {path}; se conserva la última línea")
        frame = frame[~duplicated]

    user_ids = np.sort(frame["user_id"].unique())
    item_ids = np.sort(frame["item_id"].unique())
    if scale is None:
        scale = RatingScale(tuple(np.sort(frame["rating"].unique()).tolist()))

    dataset = RatingDataset.from_values(
        len(user_ids),
        len(item_ids),
        scale,
        zip(np.searchsorted(user_ids, frame["user_id"].to_numpy()).tolist(),
            np.searchsorted(item_ids, frame["item_id"].to_numpy()).tolist(),
            frame["rating"].tolist()),
    )
    logger.info(f"Cargadas {len(dataset)} calificaciones de {path}: "
                f"{dataset.n_users} usuarios, {dataset.n_items} ítems, escala {scale.values}")
    return dataset, IdMapping(tuple(user_ids.tolist()), tuple(item_ids.tolist()))


def split_train_hidden(data: RatingDataset, train_fraction: float,
                       seed: int) -> Tuple[RatingDataset, RatingDataset]:
    """
    Partición aleatoria con exactamente round(train_fraction * R) calificaciones
    de entrenamiento.

    Raises:
        ValueError: Si la fracción no está en (0, 1)
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction debe estar en (0, 1), recibido {train_fraction}")
    order = np.random.default_rng(seed).permutation(len(data))
    n_train = int(np.floor(train_fraction * len(data) + 0.5))
    return data.subset(np.sort(order[:n_train])), data.subset(np.sort(order[n_train:]))


def write_ratings(data: RatingDataset, path: str, mapping: Optional[IdMapping] = None,
                  values: Optional[Sequence[float]] = None) -> None:
    """
    Escribe el dataset en formato u.data con timestamp 0.

    Args:
        data: Calificaciones a escribir
        path: Archivo de salida
        mapping: Identificadores originales (por defecto índice + 1)
        values: Valores alternativos por calificación (por defecto C_s)
    """
    mapping = mapping or IdMapping.identity(data.n_users, data.n_items)
    values = data.values if values is None else np.asarray(values, dtype=float)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for i, j, value in zip(data.users.tolist(), data.items.tolist(), values.tolist()):
            f.write(f"{mapping.user_ids[i]}\t{mapping.item_ids[j]}\t{_format_value(value)}\t0\n")
