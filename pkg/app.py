# app.py
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Query, status
from pydantic import ValidationError
from typing import List
from datetime import datetime, timezone
import logging

from utils.data_models import CaseInfo, EltResponse, HealthStatus, RunConfig, RunReport

# Import application settings and the Settings class
from config.app_config import get_app_settings, Settings
from stokes.cases import CASES, elt_pressure_drop, elt_terms
from stokes.errors import ConfigurationError, StokesError
from utils.run_helper import run_config

# Initialize settings early
settings: Settings = get_app_settings()

# --- Logging Setup ---
logging.basicConfig(level=settings.LOG_LEVEL.upper(), format=settings.LOG_FORMAT)
logger = logging.getLogger(__name__)

HEALTH_CONFIG = RunConfig(case="uniform-flow", parameters={"polynomial_degree": 4, "samples_per_edge": 12})
solver_status: str = "unknown"


def check_solver() -> str:
    """Solve a tiny uniform-flow problem; the solver is healthy if it is resolved to 1e-8."""
    try:
        _, outcome, _ = run_config(HEALTH_CONFIG, settings)
    except StokesError as e:
        logger.warning(f"Health check: solver failed: {e}")
        return "unhealthy"
    return "healthy" if outcome.residual.max_error < 1e-8 else "degraded"


# --- Application Lifespan ---
@asynccontextmanager
async def lifespan(app: FastAPI):
    """Run the solver self-check on startup."""
    global solver_status
    logger.info("Application startup sequence initiated.")
    solver_status = check_solver()
    if solver_status != "healthy":
        logger.critical(f"CRITICAL: Solver self-check reported '{solver_status}'. Solves may be inaccurate.")
    yield
    logger.info("Application shutdown sequence initiated.")


# --- FastAPI App ---
app = FastAPI(
    title="Stokes Flow Solver API",
    version="0.1.0",
    description="Bounded 2D Stokes flows computed by rational approximation of the Goursat functions, "
                "with lightning and AAA poles and Laurent series for holes.",
    lifespan=lifespan)


# --- API Endpoints ---
@app.get("/cases", response_model=List[CaseInfo], summary="List the built-in cases")
async def list_cases():
    """Lists every built-in case with its default parameters."""
    return [CaseInfo(name=name, description=entry.description, parameters=entry.config().model_dump())
            for name, entry in CASES.items()]


@app.get("/elt", response_model=EltResponse, summary="Lubrication pressure drop for the constricted channel")
async def lubrication_pressure_drop(lam: float = Query(..., ge=0.0), delta: float = Query(1.0, gt=0.0),
                                    order: int = Query(4)):
    """Pressure drop of the extended lubrication series truncated at the given order."""
    try:
        return EltResponse(lam=lam, delta=delta, order=order,
                           pressure_drop=elt_pressure_drop(lam, delta, order), terms=elt_terms(lam))
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))


@app.post("/solve", response_model=RunReport, summary="Solve a configuration document")
def solve(cfg: RunConfig):
    """ Solves a case or explicit polygon and returns the report. No artifacts are written.
    """
    try:
        _, _, report = run_config(cfg, settings)
        return report
    except (ConfigurationError, ValidationError) as e:
        logger.error(f"Invalid configuration: {e}")
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=f"Invalid configuration: {e}")
    except StokesError as e:
        logger.error(f"Solver error: {e}")
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    except Exception as e:
        logger.error(f"Unexpected error in solve: {e}")
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail="An unexpected error occurred.")


# --- Health Check Endpoint ---
@app.get("/health", response_model=HealthStatus, status_code=status.HTTP_200_OK, tags=["Management"])
async def health_check():
    """
    Provides a basic health check for the service, including the solver self-check.
    """
    global solver_status
    if solver_status == "unknown":
        solver_status = check_solver()
    return HealthStatus(application_status="healthy", solver_status=solver_status,
                        timestamp=datetime.now(timezone.utc))


if __name__ == "__main__":
    import uvicorn

    # Get settings once at startup
    app_settings = get_app_settings()
    # Use the configured host and port
    uvicorn.run(
        "app:app",
        host=app_settings.API_HOST,
        port=app_settings.API_PORT,
        log_level=app_settings.LOG_LEVEL.lower(),
        reload=False  # Set to True during development
    )
