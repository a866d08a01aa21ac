from concurrent.futures import ThreadPoolExecutor
import math
import time
import numpy as np
import pytest
from scipy import special

from emfield.core.errors import GridMismatchError, InvalidInputError
from emfield.models.field import ComplexField
from emfield.models.grid import make_grid
from emfield.models.scene import Scene
from emfield.physics.greens_operator import (
    apply_w,
    apply_w_adjoint,
    build_dense_w,
    build_w_kernel,
    incident_field,
    self_term,
    source_self_value,
)


def _rel(a, b):
    return np.linalg.norm(np.ravel(a) - np.ravel(b)) / np.linalg.norm(np.ravel(b))


def test_center_entry_matches_disk_formula():
    # pixel chosen so that k0 * a = 0.1
    frequency = 1e8
    k0 = 2 * math.pi * frequency / 299792458.0
    pixel = 0.1 / k0 * math.sqrt(math.pi)
    grid = make_grid(3, 3, pixel, frequency)
    assert grid.wavenumber * grid.disk_radius == pytest.approx(0.1, rel=1e-12)

    x = 0.1
    expected = 0.5j * (math.pi * x * special.hankel2(1, x) - 2j)
    kernel = build_w_kernel(grid)
    assert kernel.center == pytest.approx(expected, rel=1e-10)
    assert kernel.center == self_term(grid)


def test_off_diagonal_entries(make_grid_k05):
    grid = make_grid_k05(5)
    kernel = build_w_kernel(grid)
    x = grid.wavenumber * grid.disk_radius
    factor = 0.5j * math.pi * x * special.j1(x)
    for dr, dc in [(0, 1), (1, 1), (2, 3), (-4, 2)]:
        d = math.hypot(dr, dc) * grid.pixel_length
        expected = factor * special.hankel2(0, grid.wavenumber * d)
        assert kernel.at_offset(dr, dc) == pytest.approx(expected, rel=1e-10)


def test_kernel_radial_symmetry_exhaustive(make_grid_k05):
    grid = make_grid_k05(64)
    stamp = build_w_kernel(grid).kernel
    np.testing.assert_array_equal(stamp, stamp[::-1, ::-1])
    np.testing.assert_array_equal(stamp, stamp[::-1, :])
    np.testing.assert_array_equal(stamp, stamp.T)


def test_kernel_is_read_only(kernel8):
    with pytest.raises(ValueError):
        kernel8.kernel[0, 0] = 0


def test_dense_w_structure():
    grid = make_grid(4, 4, 1.0, 2.4e7)
    kernel = build_w_kernel(grid)
    dense = build_dense_w(grid, kernel).matrix
    np.testing.assert_array_equal(np.diag(dense), np.full(16, kernel.center))
    np.testing.assert_array_equal(dense, dense.T)
    # equidistant pairs: (0,0)-(0,1) and (2,2)-(3,2)
    assert dense[0, 1] == dense[10, 14]


def test_two_by_two_grid_matches_dense_entry():
    grid = make_grid(2, 2, 1.0, 2.4e7)
    kernel = build_w_kernel(grid)
    dense = build_dense_w(grid, kernel).matrix
    assert dense[0, 1] == kernel.at_offset(0, -1)
    assert dense[0, 3] == kernel.at_offset(-1, -1)


def test_dense_size_cap():
    with pytest.raises(InvalidInputError):
        build_dense_w(make_grid(65, 64, 1.0, 2.4e7))


@pytest.mark.parametrize("size", [12, 24])
def test_fft_matches_dense(make_grid_k05, rng, size):
    grid = make_grid_k05(size)
    kernel = build_w_kernel(grid)
    dense = build_dense_w(grid, kernel)
    for _ in range(20):
        x = ComplexField(grid=grid, values=rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
        assert _rel(apply_w(kernel, x).values, dense.matvec(x).values) <= 1e-10
        assert _rel(apply_w_adjoint(kernel, x).values, dense.rmatvec(x).values) <= 1e-10


def test_fft_matches_dense_rectangular(rng):
    grid = make_grid(5, 11, 1.0, 2.4e7)
    kernel = build_w_kernel(grid)
    dense = build_dense_w(grid, kernel)
    x = ComplexField(grid=grid, values=rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
    assert _rel(apply_w(kernel, x).values, dense.matvec(x).values) <= 1e-10


def test_linearity_and_zero(kernel12, grid12, field_factory):
    assert not np.any(apply_w(kernel12, ComplexField.zeros(grid12)).values)
    e1, e2 = field_factory(grid12), field_factory(grid12)
    alpha = 0.7 - 1.3j
    combined = apply_w(kernel12, e1.with_values(alpha * e1.values + e2.values)).values
    separate = alpha * apply_w(kernel12, e1).values + apply_w(kernel12, e2).values
    assert _rel(combined, separate) <= 1e-12


def test_adjoint_identity(make_grid_k05, field_factory):
    grid = make_grid_k05(10)
    kernel = build_w_kernel(grid)
    x, y = field_factory(grid), field_factory(grid)
    lhs = np.vdot(y.values, apply_w(kernel, x).values)
    rhs = np.vdot(apply_w_adjoint(kernel, y).values, x.values)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_adjoint_is_conjugate_of_symmetric_operator(kernel8, grid8, field_factory):
    y = field_factory(grid8)
    adjoint = apply_w_adjoint(kernel8, y).values
    via_symmetry = np.conj(apply_w(kernel8, y.with_values(np.conj(y.values))).values)
    assert _rel(adjoint, via_symmetry) <= 1e-12


def test_grid_mismatch_rejected(kernel8, grid12):
    with pytest.raises(GridMismatchError):
        apply_w(kernel8, ComplexField.zeros(grid12))
    with pytest.raises(GridMismatchError):
        apply_w_adjoint(kernel8, ComplexField.zeros(grid12))


def test_concurrent_applications_share_one_kernel(make_grid_k05, rng):
    grid = make_grid_k05(32)
    kernel = build_w_kernel(grid)
    inputs = [rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape) for _ in range(16)]
    expected = [kernel.apply_array(x) for x in inputs]

    def work(i):
        return i, kernel.apply_array(inputs[i % 16])

    with ThreadPoolExecutor(max_workers=8) as pool:
        for i, out in pool.map(work, range(200)):
            np.testing.assert_array_equal(out, expected[i % 16])


def _median_apply_time(size, rng, repeats=100):
    grid = make_grid(size, size, 1.0, 2.4e7)
    kernel = build_w_kernel(grid)
    x = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    kernel.apply_array(x)
    timings = []
    for _ in range(repeats):
        started = time.perf_counter()
        kernel.apply_array(x)
        timings.append(time.perf_counter() - started)
    return float(np.median(timings))


@pytest.mark.slow
def test_apply_scaling(rng):
    small = _median_apply_time(64, rng)
    large = _median_apply_time(128, rng)
    assert large <= 6.0 * small


def _free_scene(size, tx):
    grid = make_grid(size, size, 1.0, 299792458.0 / (4 * math.pi))
    return Scene(grid=grid, building_mask=np.zeros(grid.shape), tx_row=tx[0], tx_col=tx[1])


def test_incident_field_values():
    scene = _free_scene(9, (4, 4))
    assert scene.grid.wavenumber == pytest.approx(0.5, rel=1e-12)
    e_inc = incident_field(scene)
    expected = -0.25j * special.hankel2(0, 0.5 * 3.0)
    assert e_inc.values[4, 7] == pytest.approx(expected, rel=1e-10)
    assert e_inc.values[1, 4] == e_inc.values[4, 7]
    assert e_inc.values[4, 4] == source_self_value(scene.grid)


def test_incident_field_equidistant_cells_are_identical():
    scene = _free_scene(21, (10, 10))
    values = incident_field(scene).values
    assert values[10 + 3, 10 + 4] == values[10 + 5, 10]
    assert values[10 - 4, 10 - 3] == values[10, 10 - 5]
    np.testing.assert_array_equal(values, values[::-1, :])
    np.testing.assert_array_equal(values, values.T)


def test_incident_magnitude_decreases_along_a_ray():
    scene = _free_scene(60, (0, 5))
    magnitude = np.abs(incident_field(scene).values[1:51, 5])
    assert np.all(np.diff(magnitude) < 0)


def test_source_cell_is_the_disk_average():
    grid = make_grid(3, 3, 1.0, 2.4e7)
    k0, a, area = grid.wavenumber, grid.disk_radius, grid.cell_area
    x = k0 * a
    # (1/A) * integral over the disk of -(j/4) H0(k0 r)
    expected = -(1j / (2 * k0 ** 2 * area)) * (math.pi * x * special.hankel2(1, x) - 2j)
    assert source_self_value(grid) == pytest.approx(expected, rel=1e-10)
