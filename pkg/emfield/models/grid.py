from pydantic import BaseModel, ConfigDict, Field, computed_field
from typing import Tuple
import math
import logging

from emfield.core.constants import SPEED_OF_LIGHT, MIN_GRID_SIDE
from emfield.core.errors import InvalidInputError

logger = logging.getLogger(__name__)


class GridSpec(BaseModel):
    """Discretized 2-D domain; derived quantities follow from the four inputs."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    height: int = Field(..., ge=MIN_GRID_SIDE, description="cells (rows)")
    width: int = Field(..., ge=MIN_GRID_SIDE, description="cells (columns)")
    pixel_length: float = Field(..., gt=0, description="meters per cell")
    frequency: float = Field(..., gt=0, description="Hz")

    @computed_field
    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi * self.frequency / SPEED_OF_LIGHT

    @computed_field
    @property
    def cell_area(self) -> float:
        return self.pixel_length * self.pixel_length

    @computed_field
    @property
    def disk_radius(self) -> float:
        return math.sqrt(self.cell_area / math.pi)

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * self.frequency

    @property
    def n_cells(self) -> int:
        return self.height * self.width

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def k0_pixel(self) -> float:
        """Electrical cell size; values above ~1 undersample the wavelength"""
        return self.wavenumber * self.pixel_length

    @property
    def cells_per_wavelength(self) -> float:
        return self.wavelength / self.pixel_length


def make_grid(height: int, width: int, pixel_length: float, frequency: float) -> GridSpec:
    """Build a validated GridSpec (raises pydantic.ValidationError on bad input)"""
    grid = GridSpec(height=height, width=width, pixel_length=pixel_length, frequency=frequency)
    logger.debug(
        f"Grid {grid.height}x{grid.width}, k0={grid.wavenumber:.6g} rad/m, "
        f"{grid.cells_per_wavelength:.3g} cells per wavelength"
    )
    return grid


GRID_PRESETS = {
    "radiomapseer": dict(height=256, width=256, pixel_length=1.0, frequency=5.9e9),
    "usc-pl": dict(height=221, width=221, pixel_length=0.86, frequency=2.5e9),
}


def grid_preset(name: str) -> GridSpec:
    """Dataset geometries: RadioMapSeer and USC-PL"""
    key = name.lower()
    if key not in GRID_PRESETS:
        raise InvalidInputError(f"Unknown grid preset '{name}'; choose from {sorted(GRID_PRESETS)}")
    return make_grid(**GRID_PRESETS[key])
