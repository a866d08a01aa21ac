"""Randomly generated urban scenes for smoke tests, self-tests and demos."""

from pathlib import Path
from typing import Optional, Union
import logging
import math
import numpy as np
from PIL import Image

from emfield.core.constants import SPEED_OF_LIGHT
from emfield.models.grid import make_grid
from emfield.models.manifest import SceneManifest
from emfield.models.scene import MaterialParams, Scene
from emfield.services.dataset_io import save_manifest

logger = logging.getLogger(__name__)

# k0 * pixel_length of generated scenes (about 12.6 cells per wavelength)
SYNTHETIC_K0_PIXEL = 0.5
SYNTHETIC_MATERIAL = MaterialParams(relative_permittivity=1.5, conductivity=5e-4)
SYNTHETIC_WINDOW_DB = (-150.0, 0.0)


def frequency_for(k0_pixel: float, pixel_length: float) -> float:
    """Frequency that gives the requested electrical cell size"""
    return k0_pixel * SPEED_OF_LIGHT / (2.0 * math.pi * pixel_length)


def make_synthetic_scene(
    size: int = 64,
    seed: int = 0,
    n_buildings: Optional[int] = None,
    pixel_length: float = 1.0,
    frequency: Optional[float] = None,
    material: MaterialParams = SYNTHETIC_MATERIAL,
) -> Scene:
    """Axis-aligned rectangular buildings around a transmitter near the center"""
    rng = np.random.default_rng(seed)
    frequency = frequency or frequency_for(SYNTHETIC_K0_PIXEL, pixel_length)
    grid = make_grid(size, size, pixel_length, frequency)
    n_buildings = max(1, size // 10) if n_buildings is None else n_buildings

    tx_row = size // 2 + int(rng.integers(-(size // 8), size // 8 + 1))
    tx_col = size // 2 + int(rng.integers(-(size // 8), size // 8 + 1))
    clearance = max(1, size // 16)

    mask = np.zeros(grid.shape, dtype=np.uint8)
    longest = max(2, size // 5)
    for _ in range(n_buildings):
        h = int(rng.integers(2, longest + 1))
        w = int(rng.integers(2, longest + 1))
        r0 = int(rng.integers(0, size - h + 1))
        c0 = int(rng.integers(0, size - w + 1))
        mask[r0:r0 + h, c0:c0 + w] = 1

    # Keep a free-space pocket around the transmitter
    mask[
        max(0, tx_row - clearance):tx_row + clearance + 1,
        max(0, tx_col - clearance):tx_col + clearance + 1,
    ] = 0

    logger.debug(f"Synthetic scene {size}x{size} (seed {seed}): {int(mask.sum())} building cells")
    return Scene(
        grid=grid,
        building_mask=mask,
        tx_row=tx_row,
        tx_col=tx_col,
        building_material=material,
    )


def write_synthetic_scene(
    directory: Union[str, Path],
    size: int = 64,
    seed: int = 0,
    n_buildings: Optional[int] = None,
    name: str = "manifest.env",
) -> Path:
    """Write mask.png and a manifest for a generated scene; returns the manifest path"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    scene = make_synthetic_scene(size=size, seed=seed, n_buildings=n_buildings)

    mask_path = directory / "mask.png"
    Image.fromarray((scene.building_mask * 255).astype(np.uint8)).save(mask_path)

    manifest = SceneManifest(
        height=scene.grid.height,
        width=scene.grid.width,
        pixel_length_m=scene.grid.pixel_length,
        frequency_hz=scene.grid.frequency,
        tx_row=scene.tx_row,
        tx_col=scene.tx_col,
        eps_r=scene.building_material.relative_permittivity,
        sigma_s_per_m=scene.building_material.conductivity,
        mask_path=mask_path,
        norm_min_db=SYNTHETIC_WINDOW_DB[0],
        norm_max_db=SYNTHETIC_WINDOW_DB[1],
    )
    path = save_manifest(manifest, directory / name)
    logger.info(f"Synthetic scene written to {path}")
    return path
