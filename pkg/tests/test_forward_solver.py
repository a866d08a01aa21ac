import numpy as np
import pytest

from emfield.core.errors import GridMismatchError, InvalidInputError
from emfield.models.field import ComplexField, ContrastMap
from emfield.models.scene import MaterialParams, Scene
from emfield.physics.forward_solver import forward_residual, solve_forward
from emfield.physics.greens_operator import build_dense_w, build_w_kernel, incident_field
from emfield.physics.materials import contrast_from_materials


def _direct(kernel, contrast, incident):
    grid = kernel.grid
    dense = build_dense_w(grid, kernel).matrix
    system = np.eye(grid.n_cells) + dense * contrast.values.ravel()[None, :]
    return np.linalg.solve(system, incident.values.ravel()).reshape(grid.shape)


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_free_space_returns_incident_exactly(kernel12, grid12, field_factory):
    incident = field_factory(grid12)
    field, report = solve_forward(kernel12, ContrastMap.free_space(grid12), incident)
    np.testing.assert_array_equal(field.values, incident.values)
    assert report.converged and report.iterations == 0
    assert report.final_residual == 0.0 and report.residual_history == [0.0]
    assert ContrastMap.free_space(grid12).is_free_space()


def test_matches_direct_solve(make_grid_k05, block_contrast_factory, field_factory):
    grid = make_grid_k05(24)
    kernel = build_w_kernel(grid)
    contrast = block_contrast_factory(grid, 6, 0.5)
    incident = field_factory(grid)
    field, report = solve_forward(kernel, contrast, incident, tol=1e-10)
    assert report.converged
    assert report.final_residual <= 1e-10
    assert _rel(field.values, _direct(kernel, contrast, incident)) <= 1e-8


def test_lossy_random_contrast_matches_direct(kernel12, grid12, contrast_factory, field_factory):
    contrast = contrast_factory(grid12)
    incident = field_factory(grid12)
    field, report = solve_forward(kernel12, contrast, incident, tol=1e-10)
    assert report.converged
    assert _rel(field.values, _direct(kernel12, contrast, incident)) <= 1e-8


def test_iteration_budget_exhausted_is_not_an_error(kernel12, grid12, block_contrast_factory, field_factory):
    contrast = block_contrast_factory(grid12, 4, 0.8)
    field, report = solve_forward(kernel12, contrast, field_factory(grid12), tol=1e-12, max_iter=1)
    assert not report.converged
    assert report.iterations == 1
    assert report.final_residual > 1e-12
    assert np.all(np.isfinite(field.values))


def test_residual_history_never_increases(kernel12, grid12, contrast_factory, field_factory):
    _, report = solve_forward(kernel12, contrast_factory(grid12), field_factory(grid12), restart=3, tol=1e-10)
    history = report.residual_history
    assert len(history) >= 2
    assert all(b <= a for a, b in zip(history, history[1:]))
    assert history[-1] == report.final_residual


def test_zero_excitation(kernel8, grid8, contrast_factory):
    field, report = solve_forward(kernel8, contrast_factory(grid8), ComplexField.zeros(grid8))
    assert not np.any(field.values)
    assert report.converged and report.final_residual == 0.0


@pytest.mark.parametrize("alpha", [2.0, -1.0, 1j])
def test_solution_is_linear_in_the_excitation(kernel12, grid12, block_contrast_factory, field_factory, alpha):
    contrast = block_contrast_factory(grid12, 4, 0.5 - 0.1j)
    incident = field_factory(grid12)
    base, _ = solve_forward(kernel12, contrast, incident, tol=1e-11)
    scaled, _ = solve_forward(kernel12, contrast, incident.with_values(alpha * incident.values), tol=1e-11)
    assert _rel(scaled.values, alpha * base.values) <= 1e-8


def test_forward_residual_examples(kernel12, grid12, block_contrast_factory, field_factory):
    contrast = block_contrast_factory(grid12, 4, 0.5)
    incident = field_factory(grid12)
    assert forward_residual(kernel12, contrast, ComplexField.zeros(grid12), incident) == pytest.approx(1.0)
    assert forward_residual(kernel12, ContrastMap.free_space(grid12), incident, incident) == 0.0
    exact = incident.with_values(_direct(kernel12, contrast, incident))
    assert forward_residual(kernel12, contrast, exact, incident) <= 1e-12


def test_reciprocity_between_free_space_points(make_grid_k05):
    grid = make_grid_k05(16)
    mask = np.zeros(grid.shape, dtype=np.uint8)
    mask[5:10, 6:12] = 1
    material = MaterialParams(relative_permittivity=3.0, conductivity=1e-4)
    a, b = (2, 3), (13, 12)
    scene_a = Scene(grid=grid, building_mask=mask, tx_row=a[0], tx_col=a[1], building_material=material)
    scene_b = scene_a.with_transmitter(*b)
    kernel = build_w_kernel(grid)
    contrast = contrast_from_materials(scene_a)

    from_a, _ = solve_forward(kernel, contrast, incident_field(scene_a), tol=1e-11)
    from_b, _ = solve_forward(kernel, contrast, incident_field(scene_b), tol=1e-11)
    assert abs(from_a.values[b] - from_b.values[a]) <= 1e-8 * abs(from_a.values[b])


def test_invalid_arguments(kernel8, grid8, grid12, field_factory):
    free = ContrastMap.free_space(grid8)
    incident = field_factory(grid8)
    with pytest.raises(InvalidInputError):
        solve_forward(kernel8, free, incident, tol=0.0)
    with pytest.raises(InvalidInputError):
        solve_forward(kernel8, free, incident, max_iter=0)
    with pytest.raises(GridMismatchError):
        solve_forward(kernel8, ContrastMap.free_space(grid12), incident)
