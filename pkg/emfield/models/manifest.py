from pydantic import BaseModel, ConfigDict, Field, model_validator
from pathlib import Path
from typing import Optional

from emfield.core.constants import DEFAULT_EPS_R, DEFAULT_SIGMA


class SceneManifest(BaseModel):
    """Key/value scene description; paths are absolute once loaded"""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False, extra="forbid")

    height: int = Field(..., ge=2)
    width: int = Field(..., ge=2)
    pixel_length_m: float = Field(..., gt=0)
    frequency_hz: float = Field(..., gt=0)
    tx_row: int = Field(..., ge=0)
    tx_col: int = Field(..., ge=0)
    eps_r: float = Field(DEFAULT_EPS_R, ge=1.0)
    sigma_s_per_m: float = Field(DEFAULT_SIGMA, ge=0.0)
    mask_path: Path
    truth_path: Optional[Path] = None
    terrain_path: Optional[Path] = None
    # dB window mapped onto [0, 1]; no default, every scene states its own
    norm_min_db: float = Field(...)
    norm_max_db: float = Field(...)
    floor_db: Optional[float] = None
    ref_db: float = 0.0
    source: Optional[Path] = Field(None, exclude=True)

    @model_validator(mode="after")
    def check_window(self):
        if self.norm_min_db >= self.norm_max_db:
            raise ValueError(f"norm_min_db ({self.norm_min_db}) must be below norm_max_db ({self.norm_max_db})")
        return self

    def referenced_files(self):
        return [p for p in (self.mask_path, self.truth_path, self.terrain_path) if p is not None]
