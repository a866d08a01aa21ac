import numpy as np
import pytest
from PIL import Image

from emfield.models.field import ComplexField, ContrastMap
from emfield.models.grid import GridSpec
from emfield.models.manifest import SceneManifest
from emfield.physics.greens_operator import build_w_kernel
from emfield.services.dataset_io import save_manifest
from emfield.services.selftest import block_contrast, random_contrast, random_field, selftest_grid
from emfield.services.synthetic import SYNTHETIC_MATERIAL, SYNTHETIC_WINDOW_DB


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_grid_k05():
    """Square grid, 1 m cells, k0 * pixel = 0.5"""
    return selftest_grid


@pytest.fixture
def grid8() -> GridSpec:
    return selftest_grid(8)


@pytest.fixture
def grid12() -> GridSpec:
    return selftest_grid(12)


@pytest.fixture
def kernel8(grid8):
    return build_w_kernel(grid8)


@pytest.fixture
def kernel12(grid12):
    return build_w_kernel(grid12)


@pytest.fixture
def field_factory(rng):
    def make(grid: GridSpec) -> ComplexField:
        return random_field(grid, rng)
    return make


@pytest.fixture
def contrast_factory(rng):
    def make(grid: GridSpec) -> ContrastMap:
        return random_contrast(grid, rng)
    return make


@pytest.fixture
def block_contrast_factory():
    return block_contrast


@pytest.fixture
def scene_manifest(tmp_path):
    """16x16 scene on disk: one 4x4 building, transmitter at (3, 3). Returns the manifest path."""
    directory = tmp_path / "scene"
    directory.mkdir()
    pixels = np.zeros((16, 16), dtype=np.uint8)
    pixels[8:12, 7:11] = 255
    Image.fromarray(pixels).save(directory / "mask.png")

    grid = selftest_grid(16)
    manifest = SceneManifest(
        height=16,
        width=16,
        pixel_length_m=grid.pixel_length,
        frequency_hz=grid.frequency,
        tx_row=3,
        tx_col=3,
        eps_r=SYNTHETIC_MATERIAL.relative_permittivity,
        sigma_s_per_m=SYNTHETIC_MATERIAL.conductivity,
        mask_path=directory / "mask.png",
        norm_min_db=SYNTHETIC_WINDOW_DB[0],
        norm_max_db=SYNTHETIC_WINDOW_DB[1],
    )
    return save_manifest(manifest, directory / "manifest.env")
