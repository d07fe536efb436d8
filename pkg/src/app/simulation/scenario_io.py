"""
Exportación e importación de escenarios como texto plano.

Formato: líneas `clave = valor` seguidas de un bloque `[mu level=s]` por
nivel, con K filas de L valores. Los reales se escriben con 17 dígitos
significativos, de modo que la lectura reproduce los mismos bits.

    n_users = 300
    n_items = 200
    scale = 1 2 3 4 5
    alpha = 0.1 0.2 0.4 0.2 0.1
    ...
    [mu level=1]
    0.65 0.45 ...
"""
import os
import re
from typing import Dict, List

import numpy as np

from src.core.types import BlockArray, RatingScale
from .models import SimScenario

_BLOCK_HEADER = re.compile(r"^\[mu level=(\d+)\]$")
_REQUIRED_KEYS = ("n_users", "n_items", "scale", "alpha", "beta", "eta", "outlier_rate", "seed")


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _join(values) -> str:
    return " ".join(_fmt(float(v)) for v in values)


def export_scenario(scenario: SimScenario, path: str) -> None:
    """
    Escribe el escenario (con mu ya normalizado) en `path`.

    Args:
        scenario: Escenario a exportar
        path: Ruta del archivo de salida
    """
    lines = [
        "# escenario sintetico BM2",
        f"n_users = {scenario.n_users}",
        f"n_items = {scenario.n_items}",
        f"K = {scenario.K}",
        f"L = {scenario.L}",
        f"S = {scenario.S}",
        f"scale = {_join(scenario.scale.values)}",
        f"alpha = {_join(scenario.alpha)}",
        f"beta = {_join(scenario.beta)}",
        f"eta = {_fmt(scenario.eta)}",
        f"outlier_rate = {_fmt(scenario.outlier_rate)}",
        f"seed = {scenario.seed}",
        f"delta_mode = {scenario.delta_mode.value}",
        f"masking = {scenario.masking.value}",
    ]
    lines.extend(f"note = {note}" for note in scenario.notes)
    for s in range(scenario.S):
        lines.append(f"[mu level={s + 1}]")
        lines.extend(_join(row) for row in scenario.mu.mu[:, :, s])

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def _parse_floats(text: str, line_number: int) -> List[float]:
    try:
        return [float(token) for token in text.split()]
    except ValueError:
        raise ValueError(f"Línea {line_number}: se esperaban números, se recibió '{text}'")


def import_scenario(path: str) -> SimScenario:
    """
    Lee un escenario exportado con export_scenario.

    Raises:
        FileNotFoundError: Si el archivo no existe
        ValueError: Si el contenido es inválido (se indica la línea)
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"No se encontró el archivo de escenario: {path}")

    settings: Dict[str, str] = {}
    notes: List[str] = []
    blocks: Dict[int, List[List[float]]] = {}
    current = None

    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            header = _BLOCK_HEADER.match(line)
            if header:
                current = int(header.group(1))
                if current in blocks:
                    raise ValueError(f"Línea {line_number}: bloque mu level={current} repetido")
                blocks[current] = []
                continue
            if current is not None:
                blocks[current].append(_parse_floats(line, line_number))
                continue
            if "=" not in line:
                raise ValueError(f"Línea {line_number}: se esperaba 'clave = valor', se recibió '{line}'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "note":
                notes.append(value)
            else:
                settings[key] = value

    missing = [key for key in _REQUIRED_KEYS if key not in settings]
    if missing:
        raise ValueError(f"Faltan claves en {path}: {', '.join(missing)}")

    scale = RatingScale(tuple(_parse_floats(settings["scale"], 0)))
    if sorted(blocks) != list(range(1, scale.size + 1)):
        raise ValueError(f"Se esperaban bloques mu level=1..{scale.size}, se encontraron {sorted(blocks)}")
    try:
        mu = np.stack([np.array(blocks[s], dtype=float) for s in range(1, scale.size + 1)], axis=2)
    except ValueError:
        raise ValueError("Los bloques mu no tienen todos la misma forma K x L")

    return SimScenario(
        n_users=int(settings["n_users"]),
        n_items=int(settings["n_items"]),
        alpha=tuple(_parse_floats(settings["alpha"], 0)),
        beta=tuple(_parse_floats(settings["beta"], 0)),
        mu=BlockArray(mu),
        eta=float(settings["eta"]),
        outlier_rate=float(settings["outlier_rate"]),
        seed=int(settings["seed"]),
        delta_mode=settings.get("delta_mode", "per-pair"),
        masking=settings.get("masking", "bernoulli"),
        scale=scale,
        notes=tuple(notes),
    )
