from fastapi import APIRouter, HTTPException, status
import logging

from .models import ScenarioSummary
from .scenarios import SUPPORTED_SIZES, builtin_scenario


router = APIRouter(
    prefix="/simulation",
    tags=["Simulation"],
    responses={404: {"description": "Not found"}},
)


@router.get(
    "/scenarios/{k}",
    response_model=ScenarioSummary,
    summary="Consultar un escenario integrado",
    description="Devuelve alpha, beta y los bloques mu normalizados del escenario K = L = k",
)
async def get_scenario(k: int) -> ScenarioSummary:
    """
    Describe el escenario integrado de tamaño k.

    - **k**: 5, 7 o 9
    """
    if k not in SUPPORTED_SIZES:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Escenario no soportado K = L = {k}; opciones: {list(SUPPORTED_SIZES)}"
        )
    try:
        scenario = builtin_scenario(k)
    except Exception as e:
        logging.error(f"Error construyendo el escenario {k}: {e}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Error interno del servidor: {str(e)}"
        )

    return ScenarioSummary(
        k=k,
        n_users=scenario.n_users,
        n_items=scenario.n_items,
        S=scenario.S,
        alpha=list(scenario.alpha),
        beta=list(scenario.beta),
        eta=scenario.eta,
        outlier_rate=scenario.outlier_rate,
        mu=scenario.mu.mu.tolist(),
        notes=list(scenario.notes),
    )
