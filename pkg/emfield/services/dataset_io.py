"""
Dataset ingestion and the engine's on-disk formats.

PortableGrid layout (little-endian):
    8 bytes   magic "EMFGRID1"
    uint32    dtype code (1 = f32, 2 = c64 as interleaved real/imag f32)
    uint32    H
    uint32    W
    H*W*size  row-major payload
    uint32    CRC-32 of the payload
"""

from pydantic import BaseModel, ConfigDict, ValidationError, ValidationInfo, field_validator
from dotenv import dotenv_values
from PIL import Image, UnidentifiedImageError
from matplotlib import colormaps
from pathlib import Path
from typing import Dict, Literal, Optional, Union
import io
import logging
import os
import struct
import tempfile
import zlib
import numpy as np

from emfield.core.config import settings
from emfield.core.errors import (
    ChecksumMismatchError,
    DataFormatError,
    ImageFormatError,
    InvalidInputError,
    MagicMismatchError,
    ManifestError,
    ManifestValidationError,
    TruncatedPayloadError,
)
from emfield.models.field import ComplexField, MapUnit, RealMap, frozen_array
from emfield.models.grid import GridSpec, make_grid
from emfield.models.manifest import SceneManifest
from emfield.models.pathloss import PathLossConfig
from emfield.models.scene import MaterialParams, Scene

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MAGIC = b"EMFGRID1"
HEADER = struct.Struct("<III")
TRAILER = struct.Struct("<I")
DTYPE_CODES = {"f32": 1, "c64": 2}
DTYPE_LAYOUT = {"f32": np.dtype("<f4"), "c64": np.dtype("<c8")}

# Images reduced to one channel with the ITU-R 601-2 luma transform
LUMA_REDUCIBLE = {"RGB", "RGBA", "LA", "1", "P"}


# ---------------------------------------------------------------------------
# PortableGrid
# ---------------------------------------------------------------------------

class PortableGrid(BaseModel):
    """In-memory image of one PortableGrid file"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dtype: Literal["f32", "c64"]
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _as_layout(cls, v, info: ValidationInfo):
        arr = np.asarray(v)
        if arr.ndim != 2:
            raise ValueError("PortableGrid payload must be two-dimensional")
        if "dtype" not in info.data:
            raise ValueError("PortableGrid dtype is missing")
        return frozen_array(arr, DTYPE_LAYOUT[info.data["dtype"]])

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_field(cls, field: ComplexField) -> "PortableGrid":
        return cls(dtype="c64", values=field.values)

    @classmethod
    def from_map(cls, real_map: RealMap) -> "PortableGrid":
        return cls(dtype="f32", values=real_map.values)

    def to_field(self, grid: GridSpec) -> ComplexField:
        self._check_shape(grid)
        return ComplexField(grid=grid, values=self.values)

    def to_map(self, grid: GridSpec, unit: MapUnit = MapUnit.LINEAR) -> RealMap:
        self._check_shape(grid)
        if self.dtype != "f32":
            raise DataFormatError("complex PortableGrid cannot be read as a real map")
        return RealMap(grid=grid, values=self.values, unit=unit)

    def _check_shape(self, grid: GridSpec):
        if self.values.shape != grid.shape:
            raise DataFormatError(f"stored grid {self.values.shape} does not match expected {grid.shape}")

    def to_bytes(self) -> bytes:
        payload = self.values.tobytes(order="C")
        header = MAGIC + HEADER.pack(DTYPE_CODES[self.dtype], self.height, self.width)
        return header + payload + TRAILER.pack(zlib.crc32(payload) & 0xFFFFFFFF)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "PortableGrid":
        if len(blob) < len(MAGIC) or blob[:len(MAGIC)] != MAGIC:
            raise MagicMismatchError("not a PortableGrid file (bad magic)")
        offset = len(MAGIC)
        if len(blob) < offset + HEADER.size:
            raise TruncatedPayloadError("PortableGrid header is truncated")
        code, height, width = HEADER.unpack_from(blob, offset)
        offset += HEADER.size

        dtype = next((name for name, c in DTYPE_CODES.items() if c == code), None)
        if dtype is None:
            raise DataFormatError(f"unknown PortableGrid dtype code {code}")
        layout = DTYPE_LAYOUT[dtype]
        size = height * width * layout.itemsize
        expected = offset + size + TRAILER.size
        if len(blob) != expected:
            raise TruncatedPayloadError(
                f"PortableGrid payload length mismatch: file has {len(blob)} bytes, layout needs {expected}"
            )

        payload = blob[offset:offset + size]
        (stored_crc,) = TRAILER.unpack_from(blob, offset + size)
        if zlib.crc32(payload) & 0xFFFFFFFF != stored_crc:
            raise ChecksumMismatchError("PortableGrid CRC-32 does not match the payload")
        values = np.frombuffer(payload, dtype=layout).reshape(height, width)
        return cls(dtype=dtype, values=values)


def atomic_write(path: PathLike, data: bytes):
    """Write via a temporary file in the target directory, then rename over the target"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_grid(path: PathLike, grid: Union[PortableGrid, ComplexField, RealMap]):
    if isinstance(grid, ComplexField):
        grid = PortableGrid.from_field(grid)
    elif isinstance(grid, RealMap):
        grid = PortableGrid.from_map(grid)
    atomic_write(path, grid.to_bytes())
    logger.debug(f"Wrote {grid.dtype} grid {grid.height}x{grid.width} to {path}")


def load_grid(path: PathLike) -> PortableGrid:
    return PortableGrid.from_bytes(Path(path).read_bytes())


def file_digest(path: PathLike) -> str:
    """CRC-32 of a file as 8 hex digits"""
    crc = 0
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            crc = zlib.crc32(chunk, crc)
    return f"{crc & 0xFFFFFFFF:08x}"


# ---------------------------------------------------------------------------
# Images
# ---------------------------------------------------------------------------

def _read_gray(path: PathLike) -> np.ndarray:
    """8-bit single-channel pixels of an image file"""
    try:
        with Image.open(path) as img:
            img.load()
            if img.width == 0 or img.height == 0:
                raise ImageFormatError(f"{path}: zero-size image")
            if img.mode in LUMA_REDUCIBLE:
                img = img.convert("L")
            elif img.mode != "L":
                raise ImageFormatError(f"{path}: unsupported image mode {img.mode} (need 8-bit grayscale)")
            return np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise ImageFormatError(f"{path}: unreadable image ({e})") from e


def load_building_mask(path: PathLike, threshold: Optional[int] = None) -> np.ndarray:
    """pixel >= threshold -> 1 (building), else 0"""
    threshold = settings.MASK_THRESHOLD if threshold is None else threshold
    if not 0 <= threshold <= 255:
        raise InvalidInputError(f"mask threshold must lie in [0, 255], got {threshold}")
    pixels = _read_gray(path)
    return (pixels >= threshold).astype(np.uint8)


def load_groundtruth_map(
    path: PathLike, grid: GridSpec, cfg: Optional[PathLossConfig] = None
) -> RealMap:
    """8-bit gain image -> normalized map (v / 255); the window is carried as metadata only"""
    cfg = cfg or PathLossConfig()
    pixels = _read_gray(path)
    if pixels.shape != grid.shape:
        raise ManifestError(f"{path}: image {pixels.shape} does not match grid {grid.shape}")
    return RealMap(
        grid=grid,
        values=pixels.astype(np.float64) / 255.0,
        unit=MapUnit.NORMALIZED,
        metadata=cfg.window(),
    )


def _image_format(path: Path) -> str:
    fmt = Image.registered_extensions().get(path.suffix.lower())
    if fmt is None:
        raise ImageFormatError(f"cannot infer an image format from '{path.name}'")
    return fmt


def export_heatmap(
    real_map: RealMap, path: PathLike, colormap: Literal["grayscale", "viridis"] = "grayscale"
) -> Path:
    """Normalized map -> 8-bit image (grayscale round(255 v), or viridis RGB)"""
    if real_map.unit != MapUnit.NORMALIZED:
        raise InvalidInputError("heatmap export needs a normalized map in [0, 1]")
    target = Path(path)
    values = real_map.values
    if colormap == "grayscale":
        img = Image.fromarray(np.round(255.0 * values).astype(np.uint8))
    elif colormap == "viridis":
        rgba = colormaps["viridis"](values, bytes=True)
        img = Image.fromarray(np.ascontiguousarray(rgba[..., :3]))
    else:
        raise InvalidInputError(f"unknown colormap '{colormap}'")

    buffer = io.BytesIO()
    img.save(buffer, format=_image_format(target))
    atomic_write(target, buffer.getvalue())
    return target


# ---------------------------------------------------------------------------
# Scene manifests
# ---------------------------------------------------------------------------

PATH_KEYS = ("mask_path", "truth_path", "terrain_path")


def load_manifest(path: PathLike) -> SceneManifest:
    """KEY=value manifest -> SceneManifest with absolute, existing file paths"""
    source = Path(path)
    if not source.is_file():
        raise ManifestError(f"manifest not found: {source}")
    raw = {k: v for k, v in dotenv_values(source).items() if v not in (None, "")}
    if raw.pop("source", None) is not None:
        logger.warning(f"{source}: ignoring reserved key 'source'")
    base = source.resolve().parent
    for key in PATH_KEYS:
        if key in raw:
            p = Path(raw[key]).expanduser()
            raw[key] = p if p.is_absolute() else base / p

    try:
        manifest = SceneManifest(**raw, source=source.resolve())
    except ValidationError as e:
        raise ManifestValidationError(f"{source}: invalid manifest: {e}") from e

    for referenced in manifest.referenced_files():
        if not referenced.is_file():
            raise ManifestError(f"{source}: referenced file does not exist: {referenced}")
    logger.debug(f"Loaded manifest {source}")
    return manifest


def save_manifest(manifest: SceneManifest, path: PathLike) -> Path:
    """Write KEY=value lines; paths under the manifest directory are stored relative"""
    target = Path(path)
    base = target.resolve().parent
    lines = []
    for key, value in manifest.model_dump(exclude_none=True).items():
        if key in PATH_KEYS:
            resolved = Path(value).resolve()
            try:
                value = resolved.relative_to(base).as_posix()
            except ValueError:
                value = str(resolved)
        lines.append(f"{key}={value}")
    atomic_write(target, ("\n".join(lines) + "\n").encode("utf-8"))
    return target


def manifest_grid(manifest: SceneManifest) -> GridSpec:
    return make_grid(manifest.height, manifest.width, manifest.pixel_length_m, manifest.frequency_hz)


def pathloss_config(manifest: SceneManifest, normalize: bool = True) -> PathLossConfig:
    floor = manifest.norm_min_db if manifest.floor_db is None else manifest.floor_db
    return PathLossConfig(
        floor_db=floor,
        ref_db=manifest.ref_db,
        normalize=normalize,
        norm_min_db=manifest.norm_min_db,
        norm_max_db=manifest.norm_max_db,
    )


def _load_terrain(path: Path, grid: GridSpec) -> np.ndarray:
    if path.suffix.lower() in (".emfg", ".bin"):
        terrain = load_grid(path).values.astype(np.float64)
    else:
        terrain = _read_gray(path).astype(np.float64)
    if terrain.shape != grid.shape:
        raise ManifestError(f"{path}: terrain {terrain.shape} does not match grid {grid.shape}")
    return terrain


def load_scene(manifest: SceneManifest, threshold: Optional[int] = None) -> Scene:
    """Assemble a Scene; every dimension mismatch is reported before any computation"""
    grid = manifest_grid(manifest)
    mask = load_building_mask(manifest.mask_path, threshold)
    if mask.shape != grid.shape:
        raise ManifestError(
            f"{manifest.mask_path}: mask {mask.shape} does not match manifest {grid.shape}"
        )
    terrain = _load_terrain(manifest.terrain_path, grid) if manifest.terrain_path else None
    try:
        return Scene(
            grid=grid,
            building_mask=mask,
            tx_row=manifest.tx_row,
            tx_col=manifest.tx_col,
            building_material=MaterialParams(
                relative_permittivity=manifest.eps_r, conductivity=manifest.sigma_s_per_m
            ),
            terrain=terrain,
        )
    except ValidationError as e:
        raise ManifestValidationError(f"inconsistent scene in manifest: {e}") from e


def load_truth(manifest: SceneManifest, grid: GridSpec) -> Optional[RealMap]:
    if manifest.truth_path is None:
        return None
    return load_groundtruth_map(manifest.truth_path, grid, pathloss_config(manifest))


def manifest_digests(manifest: SceneManifest) -> Dict[str, str]:
    """CRC-32 of the manifest and every file it references"""
    digests = {}
    if manifest.source is not None:
        digests[str(manifest.source)] = file_digest(manifest.source)
    for referenced in manifest.referenced_files():
        digests[str(referenced)] = file_digest(referenced)
    return digests


# Geometry attached to maps loaded without a manifest; only the shape matters
BARE_PIXEL_LENGTH = 1.0
BARE_FREQUENCY = 1e9


def load_map(path: PathLike, grid: Optional[GridSpec] = None) -> RealMap:
    """Real map from a PortableGrid (.emfg, f32) or an 8-bit image (v / 255)"""
    path = Path(path)
    if path.suffix.lower() == ".emfg":
        values = load_grid(path)
        if values.dtype != "f32":
            raise DataFormatError(f"{path}: expected a real (f32) grid")
        grid = grid or make_grid(values.height, values.width, BARE_PIXEL_LENGTH, BARE_FREQUENCY)
        return values.to_map(grid)
    pixels = _read_gray(path)
    grid = grid or make_grid(pixels.shape[0], pixels.shape[1], BARE_PIXEL_LENGTH, BARE_FREQUENCY)
    return load_groundtruth_map(path, grid)
