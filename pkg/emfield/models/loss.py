from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import Literal, Optional


class LossWeights(BaseModel):
    """Physics-loss hyperparameters. Defaults: beta = 0.1, lambda = 0.5 / 0.5."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    lambda_pde: float = Field(0.5, ge=0.0)
    lambda_vie: float = Field(0.5, ge=0.0)
    beta: float = Field(0.1, ge=0.0)
    # -1 penalizes lap(E) - beta*E, +1 penalizes lap(E) + beta*E
    pde_sign: Literal[-1, 1] = -1

    @field_validator("pde_sign", mode="before")
    @classmethod
    def _coerce_sign(cls, v):
        if isinstance(v, str):
            v = v.strip()
            if v in ("+", "-"):
                return 1 if v == "+" else -1
            return int(v)
        return v


class LossBreakdown(BaseModel):
    model_config = ConfigDict(frozen=True)

    pde: float = Field(..., ge=0.0)
    vie: float = Field(..., ge=0.0)
    data: Optional[float] = Field(None, ge=0.0)
    composite: float = Field(..., ge=0.0)

    @classmethod
    def combine(
        cls, pde: float, vie: float, weights: LossWeights, data: Optional[float] = None
    ) -> "LossBreakdown":
        composite = weights.lambda_pde * pde + weights.lambda_vie * vie
        if data is not None:
            composite += data
        return cls(pde=pde, vie=vie, data=data, composite=composite)

    def as_row(self) -> str:
        data = "" if self.data is None else f"{self.data:.12e}"
        return f"{self.pde:.12e}\t{self.vie:.12e}\t{data}\t{self.composite:.12e}"
