from pydantic import BaseModel, ConfigDict, Field, model_validator
from datetime import datetime
from typing import Any, Dict, List, Optional

from emfield.models.loss import LossBreakdown


class SolveReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    iterations: int = Field(..., ge=0)
    final_residual: float = Field(..., ge=0.0)
    converged: bool
    wall_time: float = Field(..., ge=0.0)
    tolerance: float
    residual_history: List[float] = Field(default_factory=list)
    restarts: int = 0
    k0_pixel: float = 0.0

    @model_validator(mode="after")
    def _check_converged(self):
        if self.converged and self.final_residual > self.tolerance:
            raise ValueError("converged report with residual above tolerance")
        return self


class ReconstructionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    loss_history: List[LossBreakdown]
    iterations: int = Field(..., ge=0)
    converged: bool
    final_grad_norm: float = Field(..., ge=0.0)
    stop_reason: str
    wall_time: float = 0.0

    def history_table(self) -> str:
        """One LossBreakdown per line (tab separated)"""
        lines = ["iteration\tpde\tvie\tdata\tcomposite"]
        for i, row in enumerate(self.loss_history):
            lines.append(f"{i}\t{row.as_row()}")
        return "\n".join(lines) + "\n"


class MetricsReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    nmse: float = Field(..., ge=0.0)
    nmse_db: float
    rmse: float = Field(..., ge=0.0)
    mae: float = Field(..., ge=0.0)
    ssim: float = Field(..., ge=-1.0, le=1.0)
    ssim_mode: str = "global"

    def to_text(self) -> str:
        return (
            f"nmse      {self.nmse:.6e}\n"
            f"nmse_db   {self.nmse_db:.4f}\n"
            f"rmse      {self.rmse:.6e}\n"
            f"mae       {self.mae:.6e}\n"
            f"ssim      {self.ssim:.6f} ({self.ssim_mode})\n"
        )


class RunRecord(BaseModel):
    command: str
    config: Dict[str, Any] = Field(default_factory=dict)
    input_digests: Dict[str, str] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    solve_report: Optional[SolveReport] = None
    reconstruction_report: Optional[ReconstructionReport] = None
    created_at: str = Field(default_factory=lambda: datetime.now().isoformat())
