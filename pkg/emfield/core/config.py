from pydantic_settings import BaseSettings, SettingsConfigDict
import os
from typing import Optional


class Settings(BaseSettings):
    # Worker pool (batch mode)
    THREADS: Optional[int] = None

    # Logging
    LOG_LEVEL: str = "INFO"

    # Forward solver
    SOLVER_TOL: float = 1e-8
    SOLVER_MAX_ITER: int = 2000
    SOLVER_RESTART: int = 30

    # Field reconstruction
    RECON_MAX_ITERS: int = 5000
    RECON_STEP_INIT: float = 1.0
    RECON_GRAD_TOL: float = 1e-8
    RECON_LOSS_TOL: float = 1e-12

    # Oracle paths
    DENSE_MAX_CELLS: int = 4096

    # Dataset ingestion
    MASK_THRESHOLD: int = 128

    model_config = SettingsConfigDict(
        env_prefix="EMFIELD_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    def worker_count(self) -> int:
        """Size of the batch worker pool"""
        if self.THREADS is not None and self.THREADS > 0:
            return self.THREADS
        return os.cpu_count() or 1


settings = Settings()
