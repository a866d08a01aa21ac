import logging
import numpy as np

from emfield.core.constants import EPSILON_0
from emfield.models.field import ContrastMap
from emfield.models.scene import MaterialParams, Scene

logger = logging.getLogger(__name__)


def material_contrast(material: MaterialParams, angular_frequency: float) -> complex:
    """chi = (eps_r - 1) - j*sigma/(omega*eps_0) for a non-magnetic medium"""
    return complex(
        material.relative_permittivity - 1.0,
        -material.conductivity / (angular_frequency * EPSILON_0),
    )


def contrast_from_materials(scene: Scene) -> ContrastMap:
    """Contrast map: building cells carry the material contrast, free space is exactly 0"""
    chi = material_contrast(scene.building_material, scene.grid.angular_frequency)
    values = np.where(scene.building_mask == 1, chi, 0.0 + 0.0j).astype(np.complex128)
    logger.debug(
        f"Contrast chi={chi:.6g} on {int(scene.building_mask.sum())} building cells"
    )
    return ContrastMap(grid=scene.grid, values=values)
