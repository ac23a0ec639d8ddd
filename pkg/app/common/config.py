from functools import lru_cache
from typing import Literal

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file=".env", extra="ignore")

    APP_NAME: str = "cra-toolkit"
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

    # Output
    RESULTS_DIR: str = "results"

    # Sweep work pool
    SWEEP_BACKEND: Literal["local", "celery"] = "local"
    SWEEP_THREADS: int = Field(1, ge=1)
    REDIS_URL: str = "redis://localhost:6379/0"
    SWEEP_TASK_TIMEOUT: int = 6 * 3600  # seconds per point

    # Integrator contract
    MIN_STEPS: int = 64
    PHASE_PER_STEP: float = 0.5  # radians of tau*||H|| per step on the first pass
    MAX_HALVINGS: int = 7
    PGS_ATOL: float = 1e-9
    PGS_RTOL: float = 1e-3
    PGS_RTOL_FLOOR: float = 1e-20  # relative tolerance is taken against max(P_GS, this)
    NORM_DRIFT_TOL: float = 1e-8

    # Numerics
    PRECISION_FLOOR: float = 1e-25  # fits exclude P_GS below this
    TRUST_FLOOR: float = 1e-30  # results below this are flagged
    GRAM_RCOND: float = 1e-12
    SPACING_TOL: float = 1e-10
    GAP_FLOOR: float = 1e-14
    COST_GRID: int = Field(201, ge=201)
    GAP_GRID: int = Field(400, ge=400)


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
