from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from enum import Enum
from typing import Any, Dict
import numpy as np

from emfield.models.grid import GridSpec


def frozen_array(values: Any, dtype) -> np.ndarray:
    """Copy into a C-contiguous array of the given dtype and lock it."""
    arr = np.array(values, dtype=dtype, copy=True, order="C")
    arr.setflags(write=False)
    return arr


class MapUnit(str, Enum):
    DB = "dB"
    NORMALIZED = "normalized"
    LINEAR = "linear"


class _GridArray(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: GridSpec
    values: np.ndarray

    @model_validator(mode="after")
    def _check_shape(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values contain NaN or Inf")
        return self

    @property
    def shape(self):
        return self.values.shape


class ComplexField(_GridArray):
    """H x W complex field sample (E_inc, E_tot, residuals)"""

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, v):
        return frozen_array(v, np.complex128)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ComplexField":
        return cls(grid=grid, values=np.zeros(grid.shape, dtype=np.complex128))

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def with_values(self, values) -> "ComplexField":
        return ComplexField(grid=self.grid, values=values)


class ContrastMap(_GridArray):
    """Per-cell complex contrast chi = (eps_c - eps_0) / eps_0"""

    @field_validator("values", mode="before")
    @classmethod
    def _as_complex(cls, v):
        return frozen_array(v, np.complex128)

    @model_validator(mode="after")
    def _check_passive(self):
        if np.any(self.values.imag > 0):
            raise ValueError("contrast must satisfy Im(chi) <= 0 (passive media)")
        return self

    @classmethod
    def free_space(cls, grid: GridSpec) -> "ContrastMap":
        return cls(grid=grid, values=np.zeros(grid.shape, dtype=np.complex128))

    def is_free_space(self) -> bool:
        return not np.any(self.values)


class RealMap(_GridArray):
    """Real-valued H x W map tagged with its unit"""

    unit: MapUnit = MapUnit.LINEAR
    metadata: Dict[str, float] = Field(default_factory=dict)

    @field_validator("values", mode="before")
    @classmethod
    def _as_real(cls, v):
        arr = np.asarray(v)
        if np.iscomplexobj(arr):
            raise ValueError("RealMap values must be real")
        return frozen_array(arr, np.float64)

    @model_validator(mode="after")
    def _check_normalized(self):
        if self.unit == MapUnit.NORMALIZED:
            if self.values.min() < 0.0 or self.values.max() > 1.0:
                raise ValueError("normalized maps must lie in [0, 1]")
        return self
