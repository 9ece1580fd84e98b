from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Solver and service settings loaded from environment variables with defaults."""

    # API Settings
    API_HOST: str = Field("0.0.0.0", description="API host address")
    API_PORT: int = Field(8000, description="API port number")

    # Logging Settings
    LOG_LEVEL: str = Field("info", description="Logging level (debug, info, warning, error, critical)")
    LOG_FORMAT: str = Field("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    # Pole placement
    SIGMA: float = Field(4.0, gt=0, description="Clustering constant for lightning poles")
    AAA_TOL: float = Field(1e-8, gt=0, description="Relative tolerance of the AAA fit")
    AAA_MAX_DEGREE: int = Field(100, ge=0, description="Maximum AAA degree")
    AAA_CLEANUP_TOL: float = Field(1e-13, ge=0, description="Residue threshold for Froissart cleanup (0 disables)")
    FAR_POLE_FACTOR: float = Field(1e3, gt=0,
                                   description="AAA poles beyond this multiple of the domain scale are dropped")

    # Diagnostics
    FD_STEP: float = Field(1e-2, gt=0, description="Relative step for 4th-order stencils")
    FD_STEP_FIRST: float = Field(1e-6, gt=0, description="Relative step for first-derivative stencils")

    # Runtime
    SWEEP_WORKERS: int = Field(4, ge=1, description="Thread pool size for parameter sweeps")
    EVAL_CHUNK: int = Field(2048, ge=1, description="Points per chunk when evaluating fields")
    OUTPUT_DIR: Path = Field(Path("out"), description="Default artifact directory")

    def fd_steps(self, scale: float) -> tuple[float, float]:
        """Absolute finite-difference steps (4th-order, first-derivative) for a domain of the given scale."""
        return self.FD_STEP * scale, self.FD_STEP_FIRST * scale

    model_config = SettingsConfigDict(
        env_prefix="STOKES_",
        env_file=".env",
        env_file_encoding='utf-8',
        case_sensitive=True,
        extra='ignore'
    )


@lru_cache()
def get_app_settings() -> Settings:
    """
    Create and cache a Settings instance.
    Settings are read once per process.
    """
    return Settings()
