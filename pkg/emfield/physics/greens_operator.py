"""
Discretized 2-D Green's operator W (equivalent-disk regularization) and the
incident field of a line source.

W is translation invariant, so W @ x is a linear convolution of x with a
(2H-1) x (2W-1) stamp of kernel values indexed by the offset between cells.
The stamp's spectrum is computed once per grid; apply_w and apply_w_adjoint
only transform the input.
"""

import logging
import math
import numpy as np
import scipy.fft as sfft

from emfield.core.config import settings
from emfield.core.errors import GridMismatchError, InvalidInputError
from emfield.models.field import ComplexField, frozen_array
from emfield.models.grid import GridSpec
from emfield.models.scene import Scene
from emfield.physics.special_functions import bessel_j1, hankel2_0, hankel2_1

logger = logging.getLogger(__name__)


def self_term(grid: GridSpec) -> complex:
    """Diagonal entry (j/2)[pi k0 a H1(k0 a) - 2j]"""
    x = grid.wavenumber * grid.disk_radius
    return 0.5j * (math.pi * x * hankel2_1(x) - 2j)


def coupling_factor(grid: GridSpec) -> complex:
    """Off-diagonal prefactor (j pi k0 a / 2) J1(k0 a)"""
    x = grid.wavenumber * grid.disk_radius
    return 0.5j * math.pi * x * bessel_j1(x)


def _radial_values(squared: np.ndarray, pixel_length: float, fn) -> np.ndarray:
    """fn(pixel_length * sqrt(squared)) evaluated once per distinct offset.

    Equidistant offsets share one evaluation, so they are bit-identical.
    """
    unique, inverse = np.unique(squared.ravel(), return_inverse=True)
    values = fn(np.sqrt(unique.astype(np.float64)) * pixel_length)
    return values[inverse.ravel()].reshape(squared.shape)


def _offset_squares(grid: GridSpec) -> np.ndarray:
    dr = np.arange(-(grid.height - 1), grid.height)
    dc = np.arange(-(grid.width - 1), grid.width)
    return dr[:, None] ** 2 + dc[None, :] ** 2


class WKernel:
    """Translation-invariant stamp of W with cached forward/adjoint spectra.

    Immutable after construction; apply/apply_adjoint only read the cached
    spectra, so one kernel can be shared by concurrent callers.
    """

    def __init__(self, grid: GridSpec, kernel: np.ndarray):
        expected = (2 * grid.height - 1, 2 * grid.width - 1)
        if kernel.shape != expected:
            raise InvalidInputError(f"kernel shape {kernel.shape} != {expected}")
        self._grid = grid
        self._kernel = frozen_array(kernel, np.complex128)
        self._fft_shape = (sfft.next_fast_len(expected[0]), sfft.next_fast_len(expected[1]))
        spectrum = sfft.fft2(self._kernel, s=self._fft_shape)
        # W^H stamp: conjugated, index-reversed kernel
        adjoint = sfft.fft2(np.conj(self._kernel[::-1, ::-1]), s=self._fft_shape)
        spectrum.setflags(write=False)
        adjoint.setflags(write=False)
        self._spectrum = spectrum
        self._adjoint_spectrum = adjoint

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def kernel(self) -> np.ndarray:
        return self._kernel

    @property
    def center(self) -> complex:
        return complex(self._kernel[self._grid.height - 1, self._grid.width - 1])

    def at_offset(self, d_row: int, d_col: int) -> complex:
        return complex(self._kernel[d_row + self._grid.height - 1, d_col + self._grid.width - 1])

    def _convolve(self, values: np.ndarray, spectrum: np.ndarray) -> np.ndarray:
        h, w = self._grid.shape
        full = sfft.ifft2(sfft.fft2(values, s=self._fft_shape) * spectrum)
        return full[h - 1:2 * h - 1, w - 1:2 * w - 1]

    def apply_array(self, values: np.ndarray) -> np.ndarray:
        """W @ vec(values) for a raw H x W array"""
        return self._convolve(values, self._spectrum)

    def apply_adjoint_array(self, values: np.ndarray) -> np.ndarray:
        return self._convolve(values, self._adjoint_spectrum)


class DenseW:
    """Explicit N x N matrix of W; quadratic memory, used as an oracle"""

    def __init__(self, grid: GridSpec, matrix: np.ndarray):
        self._grid = grid
        self._matrix = frozen_array(matrix, np.complex128)

    @property
    def grid(self) -> GridSpec:
        return self._grid

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def matvec(self, field: ComplexField) -> ComplexField:
        _check_grid(self._grid, field.grid, "dense operator and field")
        out = self._matrix @ field.values.ravel()
        return field.with_values(out.reshape(self._grid.shape))

    def rmatvec(self, field: ComplexField) -> ComplexField:
        _check_grid(self._grid, field.grid, "dense operator and field")
        out = self._matrix.conj().T @ field.values.ravel()
        return field.with_values(out.reshape(self._grid.shape))


def _check_grid(expected: GridSpec, actual: GridSpec, what: str):
    if expected != actual:
        raise GridMismatchError(what)


def build_w_kernel(grid: GridSpec) -> WKernel:
    squared = _offset_squares(grid)
    factor, k0 = coupling_factor(grid), grid.wavenumber
    # the zero offset is overwritten below; evaluate it at one pixel instead
    kernel = _radial_values(
        np.maximum(squared, 1), grid.pixel_length, lambda d: factor * hankel2_0(k0 * d)
    )
    kernel[squared == 0] = self_term(grid)
    if grid.k0_pixel > 1.0:
        logger.warning(
            f"k0*pixel = {grid.k0_pixel:.3g} > 1: grid undersamples the wavelength "
            f"({grid.cells_per_wavelength:.3g} cells per wavelength)"
        )
    logger.debug(f"Built W kernel {kernel.shape} for grid {grid.height}x{grid.width}")
    return WKernel(grid, kernel)


def build_dense_w(grid: GridSpec, kernel: WKernel = None) -> DenseW:
    n = grid.n_cells
    if n > settings.DENSE_MAX_CELLS:
        raise InvalidInputError(
            f"Dense W needs N <= {settings.DENSE_MAX_CELLS} cells, grid has {n}"
        )
    if kernel is None:
        kernel = build_w_kernel(grid)
    else:
        _check_grid(grid, kernel.grid, "dense grid and kernel")
    rows, cols = np.divmod(np.arange(n), grid.width)
    d_row = rows[:, None] - rows[None, :] + grid.height - 1
    d_col = cols[:, None] - cols[None, :] + grid.width - 1
    return DenseW(grid, kernel.kernel[d_row, d_col])


def apply_w(kernel: WKernel, field: ComplexField) -> ComplexField:
    """W @ E by zero-padded FFT convolution"""
    _check_grid(kernel.grid, field.grid, "kernel and field")
    return field.with_values(kernel.apply_array(field.values))


def apply_w_adjoint(kernel: WKernel, field: ComplexField) -> ComplexField:
    """W^H @ E by FFT convolution with the conjugated, reversed kernel"""
    _check_grid(kernel.grid, field.grid, "kernel and field")
    return field.with_values(kernel.apply_adjoint_array(field.values))


def source_self_value(grid: GridSpec) -> complex:
    """Disk-averaged Green's function over the source cell: -W_self / (k0^2 A)"""
    return -self_term(grid) / (grid.wavenumber ** 2 * grid.cell_area)


def incident_field(scene: Scene) -> ComplexField:
    """E_inc(p) = G(p_tx - p) = -(j/4) H0(k0 |p_tx - p|)"""
    grid = scene.grid
    rows = np.arange(grid.height) - scene.tx_row
    cols = np.arange(grid.width) - scene.tx_col
    squared = rows[:, None] ** 2 + cols[None, :] ** 2
    k0 = grid.wavenumber

    values = _radial_values(np.maximum(squared, 1), grid.pixel_length, lambda d: -0.25j * hankel2_0(k0 * d))
    values[scene.tx_row, scene.tx_col] = source_self_value(grid)
    return ComplexField(grid=grid, values=values)
