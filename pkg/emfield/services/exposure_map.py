"""Field -> path-loss / exposure maps, and empirical baseline maps."""

from typing import Optional
import logging
import numpy as np

from emfield.core.constants import SPEED_OF_LIGHT
from emfield.core.errors import InvalidInputError
from emfield.models.field import ComplexField, MapUnit, RealMap
from emfield.models.pathloss import PathLossConfig
from emfield.models.scene import Scene

logger = logging.getLogger(__name__)


def _normalize_db(level_db: np.ndarray, cfg: PathLossConfig) -> np.ndarray:
    span = cfg.norm_max_db - cfg.norm_min_db
    return np.clip((level_db - cfg.norm_min_db) / span, 0.0, 1.0)


def field_to_pathloss(field: ComplexField, cfg: Optional[PathLossConfig] = None) -> RealMap:
    """20 log10(|E| / ref) clamped at floor_db; optionally mapped into [0, 1]"""
    cfg = cfg or PathLossConfig()
    magnitude = field.magnitude()
    with np.errstate(divide="ignore"):
        level_db = 20.0 * np.log10(magnitude / cfg.ref_magnitude)
    level_db = np.where(magnitude > 0.0, level_db, cfg.floor_db)
    level_db = np.maximum(level_db, cfg.floor_db)

    if not cfg.normalize:
        return RealMap(grid=field.grid, values=level_db, unit=MapUnit.DB, metadata={"ref_db": cfg.ref_db})
    return RealMap(
        grid=field.grid,
        values=_normalize_db(level_db, cfg),
        unit=MapUnit.NORMALIZED,
        metadata={**cfg.window(), "ref_db": cfg.ref_db},
    )


def field_to_exposure(field: ComplexField) -> RealMap:
    """Exposure proportional to received power: |E|^2 / max |E|^2"""
    power = field.magnitude() ** 2
    peak = float(power.max())
    values = power / peak if peak > 0 else np.zeros_like(power)
    return RealMap(grid=field.grid, values=np.clip(values, 0.0, 1.0), unit=MapUnit.NORMALIZED)


def normalize_db_map(map_db: RealMap, cfg: Optional[PathLossConfig] = None, as_gain: bool = True) -> RealMap:
    """Push a dB map through the normalization window; loss maps become gain (-PL) first"""
    cfg = cfg or PathLossConfig()
    if map_db.unit != MapUnit.DB:
        raise InvalidInputError(f"expected a dB map, got {map_db.unit.value}")
    level = -map_db.values if as_gain else map_db.values
    return RealMap(
        grid=map_db.grid,
        values=_normalize_db(level, cfg),
        unit=MapUnit.NORMALIZED,
        metadata=cfg.window(),
    )


def tx_distances(scene: Scene) -> np.ndarray:
    """Center-to-center distance (m) from the transmitter cell"""
    rows = np.arange(scene.grid.height) - scene.tx_row
    cols = np.arange(scene.grid.width) - scene.tx_col
    squared = (rows[:, None] ** 2 + cols[None, :] ** 2).astype(np.float64)
    return np.sqrt(squared) * scene.grid.pixel_length


def baseline_log_distance(
    scene: Scene, exponent: float = 2.0, ref_distance: float = 1.0, pl0_db: float = 40.0
) -> RealMap:
    """PL = PL0 + 10 n log10(max(d, d0) / d0); a building-agnostic empirical surrogate"""
    if ref_distance <= 0:
        raise InvalidInputError("reference distance d0 must be positive")
    if exponent <= 0:
        raise InvalidInputError("path-loss exponent must be positive")
    d = np.maximum(tx_distances(scene), ref_distance)
    values = pl0_db + 10.0 * exponent * np.log10(d / ref_distance)
    return RealMap(
        grid=scene.grid,
        values=values,
        unit=MapUnit.DB,
        metadata={"exponent": exponent, "ref_distance": ref_distance, "pl0_db": pl0_db},
    )


def baseline_free_space(scene: Scene) -> RealMap:
    """FSPL = 20 log10(4 pi d f / c) with d clamped to half a pixel"""
    grid = scene.grid
    d = np.maximum(tx_distances(scene), 0.5 * grid.pixel_length)
    values = 20.0 * np.log10(4.0 * np.pi * d * grid.frequency / SPEED_OF_LIGHT)
    return RealMap(grid=grid, values=values, unit=MapUnit.DB, metadata={"frequency_hz": grid.frequency})


def encode_inputs(scene: Scene, incident: ComplexField) -> np.ndarray:
    """Four-channel network input: building mask, tx mask, Re/Im of E_inc scaled into [-1, 1]"""
    if incident.grid != scene.grid:
        raise InvalidInputError("scene and incident field are on different grids")
    scale = float(max(np.abs(incident.real).max(), np.abs(incident.imag).max()))
    if scale == 0.0:
        scale = 1.0
    return np.stack([
        scene.building_mask.astype(np.float64),
        scene.tx_mask().astype(np.float64),
        incident.real / scale,
        incident.imag / scale,
    ])


def field_magnitude_map(field: ComplexField) -> RealMap:
    """|E| / max |E| for quick-look heatmaps"""
    magnitude = field.magnitude()
    peak = float(magnitude.max())
    values = magnitude / peak if peak > 0 else np.zeros_like(magnitude)
    return RealMap(grid=field.grid, values=np.clip(values, 0.0, 1.0), unit=MapUnit.NORMALIZED)
