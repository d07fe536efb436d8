from fastapi import FastAPI
from src.app.experiments.controller import router as experiments_router
from src.app.simulation.controller import router as simulation_router

app = FastAPI(
    title="BM2 Rating Prediction API",
    description="API para ajustar modelos de bloques bipartitos de membresía mixta y predecir calificaciones",
    version="1.0.0"
)

# Incluir el router de experimentos
app.include_router(experiments_router)

# Incluir el router de escenarios sintéticos
app.include_router(simulation_router)

@app.get("/")
async def root():
    """Endpoint raíz que proporciona información básica de la API."""
    return {
        "message": "BM2 Rating Prediction API",
        "version": "1.0.0",
        "docs": "/docs",
        "run": "/experiments/run",
        "health": "/experiments/health",
        "scenarios": "/simulation/scenarios/{k}"
    }
