import os

import pytest
from hypothesis import HealthCheck, settings

from src.core.types import RatingDataset, RatingScale

settings.register_profile("default", max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

MOVIELENS_PATH = os.path.join("data", "ml-100k", "u.data")


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="ejecutar las reproducciones numéricas lentas")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: reproducción numérica lenta (requiere --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="usar --runslow para ejecutarla")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def scale5() -> RatingScale:
    return RatingScale.integer(1, 5)


@pytest.fixture
def tiny_dataset(scale5) -> RatingDataset:
    """3 usuarios x 4 ítems con 8 calificaciones sobre la escala 1..5."""
    return RatingDataset.from_values(3, 4, scale5, [
        (0, 0, 5), (0, 1, 4), (0, 2, 1),
        (1, 0, 4), (1, 1, 5), (1, 3, 2),
        (2, 2, 2), (2, 3, 1),
    ])


@pytest.fixture
def block_dataset(scale5) -> RatingDataset:
    """Dos grupos claros: usuarios 0-3 califican alto los ítems 0-3 y bajo los 4-7; usuarios 4-7 al revés."""
    rows = []
    for i in range(8):
        for j in range(8):
            if (i + j) % 3 == 0:
                continue
            same = (i < 4) == (j < 4)
            rows.append((i, j, 5 if same else 1))
    return RatingDataset.from_values(8, 8, scale5, rows)


@pytest.fixture
def movielens_path() -> str:
    if not os.path.exists(MOVIELENS_PATH):
        pytest.skip(f"No se encontró {MOVIELENS_PATH}")
    return MOVIELENS_PATH
