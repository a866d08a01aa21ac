from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Optional
import numpy as np

from emfield.core.constants import DEFAULT_EPS_R, DEFAULT_SIGMA
from emfield.models.field import frozen_array
from emfield.models.grid import GridSpec


class MaterialParams(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    relative_permittivity: float = Field(DEFAULT_EPS_R, ge=1.0)
    conductivity: float = Field(DEFAULT_SIGMA, ge=0.0, description="S/m")


class Scene(BaseModel):
    """Building mask, transmitter cell and building material on a grid"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    building_mask: np.ndarray
    tx_row: int
    tx_col: int
    building_material: MaterialParams = Field(default_factory=MaterialParams)
    # Passed through untouched (USC-PL terrain channel)
    terrain: Optional[np.ndarray] = None

    @field_validator("building_mask", mode="before")
    @classmethod
    def _as_mask(cls, v):
        arr = np.asarray(v)
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("building_mask must be strictly {0,1}-valued")
        return frozen_array(arr, np.uint8)

    @field_validator("terrain", mode="before")
    @classmethod
    def _as_terrain(cls, v):
        if v is None:
            return None
        return frozen_array(v, np.float64)

    @model_validator(mode="after")
    def _check_layout(self):
        if self.building_mask.shape != self.grid.shape:
            raise ValueError(
                f"building_mask shape {self.building_mask.shape} does not match grid {self.grid.shape}"
            )
        if self.terrain is not None and self.terrain.shape != self.grid.shape:
            raise ValueError("terrain shape does not match grid")
        if not (0 <= self.tx_row < self.grid.height and 0 <= self.tx_col < self.grid.width):
            raise ValueError(f"transmitter ({self.tx_row}, {self.tx_col}) lies outside the grid")
        if self.building_mask[self.tx_row, self.tx_col]:
            raise ValueError("transmitter cell lies inside a building")
        return self

    def tx_mask(self) -> np.ndarray:
        """One-hot transmitter map"""
        mask = np.zeros(self.grid.shape, dtype=np.uint8)
        mask[self.tx_row, self.tx_col] = 1
        return mask

    def free_space_mask(self) -> np.ndarray:
        return (1 - self.building_mask).astype(np.uint8)

    def with_transmitter(self, row: int, col: int) -> "Scene":
        return Scene(
            grid=self.grid,
            building_mask=self.building_mask,
            tx_row=row,
            tx_col=col,
            building_material=self.building_material,
            terrain=self.terrain,
        )
