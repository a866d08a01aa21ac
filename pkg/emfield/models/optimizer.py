from pydantic import BaseModel, ConfigDict, Field

from emfield.core.config import settings


class OptimizerConfig(BaseModel):
    """Gradient-descent settings for field reconstruction"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    max_iters: int = Field(default_factory=lambda: settings.RECON_MAX_ITERS, ge=1)
    step_init: float = Field(default_factory=lambda: settings.RECON_STEP_INIT, gt=0.0)
    grad_tol: float = Field(default_factory=lambda: settings.RECON_GRAD_TOL, gt=0.0)
    loss_tol: float = Field(default_factory=lambda: settings.RECON_LOSS_TOL, gt=0.0)
    line_search: bool = True
    # Armijo sufficient-decrease constant and backtracking budget
    armijo_c: float = Field(1e-4, gt=0.0, lt=1.0)
    max_backtracks: int = Field(60, ge=1)
    # next search starts from step_growth * last accepted step; 1 keeps step_init
    step_growth: float = Field(2.0, ge=1.0)
