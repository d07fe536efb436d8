from fastapi import APIRouter, Depends, HTTPException, status
import logging

from .service import ExperimentService, get_experiment_service
from .models import ExperimentResponse, ExperimentSpec


# Router para endpoints de experimentos
router = APIRouter(
    prefix="/experiments",
    tags=["Experiments"],
    responses={404: {"description": "Not found"}},
)

_CLIENT_ERRORS = {"ValueError", "ValidationError", "IndexError"}


def _status_for(error_type: str) -> int:
    if error_type == "FileNotFoundError":
        return status.HTTP_404_NOT_FOUND
    if error_type in _CLIENT_ERRORS:
        return status.HTTP_400_BAD_REQUEST
    return status.HTTP_500_INTERNAL_SERVER_ERROR


@router.post(
    "/run",
    response_model=ExperimentResponse,
    summary="Ejecutar un experimento",
    description="Ejecuta fit, predict, simulate, cv, baseline o bench y escribe los artefactos en output_dir",
)
async def run_experiment(
    spec: ExperimentSpec,
    service: ExperimentService = Depends(get_experiment_service)
) -> ExperimentResponse:
    """
    Ejecuta un experimento de forma síncrona.

    - **command**: fit, predict, simulate, cv, baseline o bench
    - **output_dir**: directorio donde se escriben los artefactos
    """
    result = service.run(spec)
    if not result["success"]:
        logging.error(f"Experimento '{spec.command.value}' fallido: {result['error']}")
        raise HTTPException(status_code=_status_for(result.get("error_type", "")), detail=result["error"])

    return ExperimentResponse(
        success=True,
        command=result["command"],
        message=result["message"],
        output_dir=result["output_dir"],
        metrics=result.get("metrics", {}),
        details=result.get("details", {}),
    )


@router.get("/health")
async def health_check():
    """Endpoint de salud para el servicio de experimentos"""
    return {"status": "healthy", "service": "experiments"}
