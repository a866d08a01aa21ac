from pydantic import BaseModel, ConfigDict, model_validator


class PathLossConfig(BaseModel):
    """Field magnitude -> dB level conversion and normalization window"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    floor_db: float = -150.0
    ref_db: float = 0.0
    normalize: bool = True
    norm_min_db: float = -150.0
    norm_max_db: float = 0.0

    @model_validator(mode="after")
    def _check_window(self):
        if not self.norm_min_db < self.norm_max_db:
            raise ValueError("norm_min_db must be below norm_max_db")
        if self.floor_db > self.norm_min_db:
            raise ValueError("floor_db must not exceed norm_min_db")
        return self

    @property
    def ref_magnitude(self) -> float:
        return 10.0 ** (self.ref_db / 20.0)

    def window(self) -> dict:
        return {"norm_min_db": self.norm_min_db, "norm_max_db": self.norm_max_db}
