import numpy as np
import pytest

from emfield.core.errors import GridMismatchError, InvalidInputError
from emfield.models.field import ComplexField, ContrastMap, MapUnit, RealMap
from emfield.models.loss import LossWeights
from emfield.physics.forward_solver import solve_forward
from emfield.physics.greens_operator import apply_w
from emfield.physics.losses import (
    grad_loss_pde,
    grad_loss_vie,
    laplacian_5pt,
    laplacian_adjoint_array,
    laplacian_array,
    loss_composite,
    loss_data,
    loss_pde,
    loss_vie,
    pde_residual_map,
)
from emfield.services.selftest import directional_gradient_error, random_field


def _loop_laplacian(f):
    h, w = f.shape
    out = np.zeros_like(f)
    for i in range(h):
        for j in range(w):
            up = f[max(i - 1, 0), j]
            down = f[min(i + 1, h - 1), j]
            left = f[i, max(j - 1, 0)]
            right = f[i, min(j + 1, w - 1)]
            out[i, j] = up + down + left + right - 4 * f[i, j]
    return out


def test_laplacian_of_quadratic_is_four_inside():
    i, j = np.meshgrid(np.arange(7.0), np.arange(9.0), indexing="ij")
    lap = laplacian_array(i ** 2 + j ** 2)
    np.testing.assert_array_equal(lap[1:-1, 1:-1], 4.0)


def test_laplacian_of_constant_is_zero_everywhere():
    assert not np.any(laplacian_array(np.full((5, 6), 3.5 - 2j)))


def test_laplacian_matches_loop(rng):
    f = rng.standard_normal((6, 9)) + 1j * rng.standard_normal((6, 9))
    np.testing.assert_allclose(laplacian_array(f), _loop_laplacian(f), rtol=0, atol=1e-12)


def test_laplacian_adjoint_is_transpose(rng):
    x = rng.standard_normal((5, 7))
    y = rng.standard_normal((5, 7))
    assert np.sum(y * laplacian_array(x)) == pytest.approx(np.sum(laplacian_adjoint_array(y) * x), rel=1e-12)


def test_laplacian_keeps_container_type(grid8, field_factory):
    field = field_factory(grid8)
    assert isinstance(laplacian_5pt(field), ComplexField)
    as_map = laplacian_5pt(RealMap(grid=grid8, values=np.ones(grid8.shape)))
    assert as_map.unit == MapUnit.LINEAR and not np.any(as_map.values)


def test_pde_residual_single_cell_value(grid8):
    values = np.zeros(grid8.shape, dtype=np.complex128)
    values[3, 4] = 1.0
    weights = LossWeights(beta=0.5, pde_sign=1)
    residual = pde_residual_map(ComplexField(grid=grid8, values=values), weights).values
    # lap + beta E = -4 + 0.5 at the cell, 1 at each neighbour
    assert residual[3, 4] == pytest.approx(12.25)
    assert residual[2, 4] == pytest.approx(1.0)
    assert residual[0, 0] == 0.0


def test_pde_residual_of_quadratic_field(grid8):
    i, j = np.meshgrid(np.arange(8.0), np.arange(8.0), indexing="ij")
    field = ComplexField(grid=grid8, values=i ** 2 + j ** 2)
    residual = pde_residual_map(field, LossWeights(beta=0.1, pde_sign=-1)).values
    # (4 - 0.1 * 25)^2
    assert residual[3, 4] == pytest.approx(2.25, rel=1e-12)
    np.testing.assert_allclose(residual[1:-1, 1:-1], (4 - 0.1 * (i ** 2 + j ** 2))[1:-1, 1:-1] ** 2, rtol=1e-12)


def test_pde_residual_from_real_and_imaginary_parts(grid8):
    # constant field: lap = 0, residual = (s beta)^2 |E|^2
    weights = LossWeights(beta=0.5, pde_sign=-1)
    field = ComplexField(grid=grid8, values=np.full(grid8.shape, 3 + 4j))
    residual = pde_residual_map(field, weights).values
    np.testing.assert_allclose(residual, 0.25 * 25.0)
    assert loss_pde(field, weights) == pytest.approx(6.25)


def test_vie_loss_single_entry(kernel8, grid8):
    incident = np.zeros(grid8.shape, dtype=np.complex128)
    incident[0, 0] = 4.0
    field = ComplexField(grid=grid8, values=incident)
    # chi = 0: R = E - E_inc has one entry of -4, so ||R||^2 / N = 16 / 64
    shifted = np.array(incident)
    shifted[0, 0] = 0.0
    loss = loss_vie(kernel8, ContrastMap.free_space(grid8), field.with_values(shifted), field)
    assert loss == pytest.approx(0.25)


def test_vie_loss_is_zero_at_the_solution(kernel8, grid8, contrast_factory, field_factory):
    contrast = contrast_factory(grid8)
    field = field_factory(grid8)
    incident = field.with_values(field.values + apply_w(kernel8, field.with_values(contrast.values * field.values)).values)
    assert loss_vie(kernel8, contrast, field, incident) <= 1e-28


@pytest.mark.parametrize("sign", [-1, 1])
def test_gradients_match_finite_differences(kernel8, grid8, rng, contrast_factory, sign):
    weights = LossWeights(pde_sign=sign, beta=0.3)
    worst_vie = worst_pde = 0.0
    for _ in range(25):
        contrast = contrast_factory(grid8)
        incident = random_field(grid8, rng)
        field = random_field(grid8, rng)
        direction = random_field(grid8, rng).values
        worst_vie = max(worst_vie, directional_gradient_error(
            lambda e: loss_vie(kernel8, contrast, e, incident),
            lambda e: grad_loss_vie(kernel8, contrast, e, incident),
            field, direction,
        ))
        worst_pde = max(worst_pde, directional_gradient_error(
            lambda e: loss_pde(e, weights),
            lambda e: grad_loss_pde(e, weights),
            field, direction,
        ))
    assert worst_vie <= 1e-5
    assert worst_pde <= 1e-5


def test_vie_gradient_in_free_space(kernel8, grid8, field_factory):
    field, incident = field_factory(grid8), field_factory(grid8)
    grad = grad_loss_vie(kernel8, ContrastMap.free_space(grid8), field, incident).values
    np.testing.assert_allclose(grad, (2.0 / grid8.n_cells) * (field.values - incident.values), rtol=1e-13)


def test_pde_loss_is_quadratic(grid8, field_factory):
    weights = LossWeights()
    field = field_factory(grid8)
    for alpha in (2.0, -3.0, 0.5j):
        scaled = loss_pde(field.with_values(alpha * field.values), weights)
        assert scaled == pytest.approx(abs(alpha) ** 2 * loss_pde(field, weights), rel=1e-12)


def test_vie_loss_is_quadratic(kernel8, grid8, field_factory, contrast_factory):
    contrast = contrast_factory(grid8)
    field, incident = field_factory(grid8), field_factory(grid8)
    base = loss_vie(kernel8, contrast, field, incident)
    for alpha in (2.0, -3.0, 0.5j, 1.5 - 2j):
        scaled = loss_vie(
            kernel8, contrast, field.with_values(alpha * field.values), incident.with_values(alpha * incident.values)
        )
        assert scaled == pytest.approx(abs(alpha) ** 2 * base, rel=1e-12)


def test_vie_gradient_vanishes_at_solver_solution(kernel12, grid12, field_factory, block_contrast_factory):
    contrast = block_contrast_factory(grid12, 3, 0.3)
    incident = field_factory(grid12)
    tol = 1e-10
    solution, report = solve_forward(kernel12, contrast, incident, tol=tol)
    assert report.converged
    # |grad| = (2/N) |(I + W chi)^H r| with |r| <= tol |E_inc|
    scale = 2.0 / grid12.n_cells * np.linalg.norm(incident.values)
    at_solution = np.linalg.norm(grad_loss_vie(kernel12, contrast, solution, incident).values)
    assert at_solution <= 10 * tol * scale


def test_pde_loss_mask(grid8, field_factory):
    weights = LossWeights()
    field = field_factory(grid8)
    full = pde_residual_map(field, weights).values
    mask = np.zeros(grid8.shape)
    mask[2:5, 1:6] = 1
    assert loss_pde(field, weights, mask) == pytest.approx(np.sum(full * mask) / grid8.n_cells)
    assert loss_pde(field, weights, np.ones(grid8.shape)) == pytest.approx(loss_pde(field, weights))
    with pytest.raises(InvalidInputError):
        loss_pde(field, weights, np.ones((3, 3)))


def test_composite_loss(kernel8, grid8, field_factory):
    weights = LossWeights(lambda_pde=0.2, lambda_vie=0.5)
    field = field_factory(grid8)
    incident = field_factory(grid8)
    contrast = ContrastMap.free_space(grid8)
    breakdown = loss_composite(kernel8, contrast, field, incident, weights)
    expected = 0.2 * loss_pde(field, weights) + 0.5 * loss_vie(kernel8, contrast, field, incident)
    assert breakdown.composite == pytest.approx(expected, rel=1e-14)
    assert breakdown.data is None


def test_composite_with_data_term(kernel8, grid8, field_factory):
    field = field_factory(grid8)
    # constant E = E_inc with chi = 0 and beta = 0: both physics terms vanish
    constant = field.with_values(np.full(grid8.shape, 1 + 1j))
    weights = LossWeights(beta=0.0)
    prediction = RealMap(grid=grid8, values=np.full(grid8.shape, 0.4), unit=MapUnit.NORMALIZED)
    target = RealMap(grid=grid8, values=np.full(grid8.shape, 0.1), unit=MapUnit.NORMALIZED)
    breakdown = loss_composite(
        kernel8, ContrastMap.free_space(grid8), constant, constant, weights, prediction, target
    )
    assert breakdown.pde == 0.0 and breakdown.vie == 0.0
    assert breakdown.data == pytest.approx(0.09)
    assert breakdown.composite == pytest.approx(0.09)
    with pytest.raises(InvalidInputError):
        loss_composite(kernel8, ContrastMap.free_space(grid8), constant, constant, weights, prediction)


def test_data_loss_rejects_mismatched_grids(grid8, grid12):
    with pytest.raises(GridMismatchError):
        loss_data(RealMap(grid=grid8, values=np.zeros(grid8.shape)), RealMap(grid=grid12, values=np.zeros(grid12.shape)))


def test_vie_loss_rejects_mismatched_grids(kernel8, grid12, field_factory):
    field = field_factory(grid12)
    with pytest.raises(GridMismatchError):
        loss_vie(kernel8, ContrastMap.free_space(grid12), field, field)


def test_pde_sign_parsing():
    assert LossWeights(pde_sign="+").pde_sign == 1
    assert LossWeights(pde_sign="-1").pde_sign == -1
    with pytest.raises(ValueError):
        LossWeights(pde_sign=0)
