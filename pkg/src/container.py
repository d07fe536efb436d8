"""
Inyección de dependencias usando FastAPI Depends.
Los servicios se construyen en sus propios módulos; aquí solo viven las
dependencias compartidas.
"""
import logging
import os
from functools import lru_cache
from dotenv import load_dotenv

# Cargar variables de entorno desde .env al inicio
load_dotenv()

from src.logging import configure_logging, LogLevels


# Configurar logging al inicio; BM2_LOG_LEVEL acepta INFO, WARN, ERROR o DEBUG
configure_logging(os.getenv("BM2_LOG_LEVEL", LogLevels.info))


@lru_cache()
def get_logger() -> logging.Logger:
    """Crea un logger singleton."""
    return logging.getLogger('bm2')


def logger_dependency() -> logging.Logger:
    """Dependency provider para Logger."""
    return get_logger()
