"""
Persistencia de artefactos de un experimento en un directorio de salida:
matrices en texto plano, reportes de métricas, trazas, resúmenes de clusters,
predicciones y la lista de aristas del grafo bipartito.
"""
import logging
import os
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from src.app.prediction.models import EvalReport, MembershipEstimates
from src.app.selection.models import CvReport
from src.core.types import BlockArray, RatingDataset, RatingScale
from .movielens import IdMapping

# Una calificación es "alta" en el grafo si está entre los dos niveles superiores
# de la escala (>= 4 en la escala 1..5).
HIGH_BAND_TOP_LEVELS = 2


class ArtifactStore:
    """
    Directorio de artefactos. Las matrices se guardan con una cabecera
    `# shape d1 d2 [d3]` y 17 dígitos significativos por valor, de modo que
    load_matrix devuelve exactamente los mismos bits.
    """

    def __init__(self, root: str, logger: Optional[logging.Logger] = None):
        """
        Args:
            root: Directorio de salida (se crea si no existe)
            logger: Logger opcional
        """
        self.root = root
        self.logger = logger or logging.getLogger(__name__)
        os.makedirs(root, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.root, name)

    def _require(self, name: str) -> str:
        path = self.path(name)
        if not os.path.exists(path):
            raise FileNotFoundError(f"Artefacto no encontrado: {path}")
        return path

    # --- Matrices -----------------------------------------------------------

    def write_matrix(self, name: str, values: np.ndarray) -> str:
        array = np.asarray(values, dtype=float)
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as f:
            f.write("# shape " + " ".join(str(d) for d in array.shape) + "\n")
            rows = array.reshape(array.shape[0], -1) if array.ndim > 1 else array.reshape(1, -1)
            for row in rows:
                f.write(" ".join(f"{v:.17g}" for v in row) + "\n")
        self.logger.debug(f"Matriz {array.shape} guardada en: {path}")
        return path

    def load_matrix(self, name: str) -> np.ndarray:
        path = self._require(name)
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().split()
            if header[:2] != ["#", "shape"]:
                raise ValueError(f"{path}: falta la cabecera '# shape'")
            shape = tuple(int(d) for d in header[2:])
            values = [float(token) for line in f for token in line.split()]
        if len(values) != int(np.prod(shape)):
            raise ValueError(f"{path}: se esperaban {int(np.prod(shape))} valores, hay {len(values)}")
        return np.array(values, dtype=float).reshape(shape)

    # --- Modelo ajustado ----------------------------------------------------

    def write_model(self, mu: BlockArray, est: MembershipEstimates, scale: RatingScale,
                    mapping: Optional[IdMapping] = None) -> None:
        """Guarda mu, pi_u, pi_i, la escala y los identificadores originales."""
        self.write_matrix("mu.txt", mu.mu)
        self.write_matrix("pi_u.txt", est.pi_u)
        self.write_matrix("pi_i.txt", est.pi_i)
        self.write_matrix("scale.txt", np.asarray(scale.values))
        mapping = mapping or IdMapping.identity(est.n_users, est.n_items)
        self.write_id_mapping(mapping)
        self.logger.info(f"Modelo guardado en: {self.root}")

    def load_model(self):
        """
        Carga un modelo exportado con write_model.

        Returns:
            Tupla (mu, membresías, escala, mapeo de identificadores)
        """
        mu = BlockArray(self.load_matrix("mu.txt"))
        est = MembershipEstimates(self.load_matrix("pi_u.txt"), self.load_matrix("pi_i.txt"))
        scale = RatingScale(tuple(self.load_matrix("scale.txt").tolist()))
        mapping = self.load_id_mapping()
        self.logger.info(f"Modelo cargado desde: {self.root}")
        return mu, est, scale, mapping

    def write_id_mapping(self, mapping: IdMapping) -> None:
        pd.DataFrame({"index": range(len(mapping.user_ids)), "user_id": mapping.user_ids}) \
            .to_csv(self.path("user_ids.csv"), index=False)
        pd.DataFrame({"index": range(len(mapping.item_ids)), "item_id": mapping.item_ids}) \
            .to_csv(self.path("item_ids.csv"), index=False)

    def load_id_mapping(self) -> IdMapping:
        users = pd.read_csv(self._require("user_ids.csv")).sort_values("index")
        items = pd.read_csv(self._require("item_ids.csv")).sort_values("index")
        return IdMapping(tuple(users["user_id"].tolist()), tuple(items["item_id"].tolist()))

    # --- Reportes -----------------------------------------------------------

    def write_metrics(self, reports: Dict[str, EvalReport], name: str = "metrics") -> pd.DataFrame:
        """
        Escribe un CSV y una tabla alineada en texto con una fila por modelo.
        Las columnas *_se solo tienen valor en reportes agregados.
        """
        frame = pd.DataFrame([{"model": model, **report.model_dump()} for model, report in reports.items()])
        frame.to_csv(self.path(f"{name}.csv"), index=False)
        with open(self.path(f"{name}.txt"), "w", encoding="utf-8") as f:
            f.write(frame.to_string(index=False, float_format=lambda v: f"{v:.4f}") + "\n")
        self.logger.info(f"Métricas guardadas en: {self.path(name + '.csv')}")
        return frame

    def write_table(self, name: str, frame: pd.DataFrame, text: bool = False) -> None:
        frame.to_csv(self.path(f"{name}.csv"), index=False)
        if text:
            with open(self.path(f"{name}.txt"), "w", encoding="utf-8") as f:
                f.write(frame.to_string(index=False, float_format=lambda v: f"{v:.4f}") + "\n")

    def write_elbo_trace(self, trace: Sequence[float], name: str = "elbo_trace.csv") -> None:
        pd.DataFrame({"step": np.arange(1, len(trace) + 1), "elbo": list(trace)}) \
            .to_csv(self.path(name), index=False, float_format="%.17g")

    def write_cluster_summary(self, summary: pd.DataFrame) -> None:
        self.write_table("cluster_summary", summary, text=True)

    def write_cv_report(self, report: CvReport) -> None:
        """Filas (K, L, réplica, fold, mae) más una fila resumen por candidato."""
        self.write_table("cv_folds", report.fold_frame())
        self.write_table("cv_summary", report.summary_frame(), text=True)

    def write_predictions(self, users: Sequence[int], items: Sequence[int], predicted: Sequence[float],
                          truth: Optional[Sequence[float]] = None,
                          mapping: Optional[IdMapping] = None, name: str = "predictions.csv") -> None:
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        columns = {
            "user_id": [mapping.user_ids[i] for i in users] if mapping else users + 1,
            "item_id": [mapping.item_ids[j] for j in items] if mapping else items + 1,
            "predicted": np.asarray(predicted, dtype=float),
        }
        if truth is not None:
            columns["rating"] = np.asarray(truth, dtype=float)
        pd.DataFrame(columns).to_csv(self.path(name), index=False)

    # --- Grafo bipartito ----------------------------------------------------

    def write_graph_edges(self, data: RatingDataset, mapping: Optional[IdMapping] = None,
                          user_clusters: Optional[np.ndarray] = None,
                          item_clusters: Optional[np.ndarray] = None,
                          keep_user_clusters: Optional[Iterable[int]] = None,
                          keep_item_clusters: Optional[Iterable[int]] = None,
                          name: str = "graph_edges.csv") -> pd.DataFrame:
        """
        Lista de aristas (source, target, rating, band) para visualización externa.

        Con asignaciones de cluster y conjuntos keep_* se exporta solo la
        subred entre los clusters indicados (numerados desde 1).
        """
        mapping = mapping or IdMapping.identity(data.n_users, data.n_items)
        high_threshold = data.scale.values[max(data.n_levels - HIGH_BAND_TOP_LEVELS, 0)]
        keep = np.ones(len(data), dtype=bool)
        if keep_user_clusters is not None and user_clusters is not None:
            keep &= np.isin(np.asarray(user_clusters)[data.users] + 1, list(keep_user_clusters))
        if keep_item_clusters is not None and item_clusters is not None:
            keep &= np.isin(np.asarray(item_clusters)[data.items] + 1, list(keep_item_clusters))

        users, items, values = data.users[keep], data.items[keep], data.values[keep]
        frame = pd.DataFrame({
            "source": [f"u{mapping.user_ids[i]}" for i in users],
            "target": [f"i{mapping.item_ids[j]}" for j in items],
            "rating": values,
            "band": np.where(values >= high_threshold, "high", "low"),
        })
        if user_clusters is not None:
            frame["source_cluster"] = np.asarray(user_clusters)[users] + 1
        if item_clusters is not None:
            frame["target_cluster"] = np.asarray(item_clusters)[items] + 1
        frame.to_csv(self.path(name), index=False)
        self.logger.info(f"{len(frame)} aristas exportadas en: {self.path(name)}")
        return frame
