"""
Helmholtz (PDE) and VIE residual losses with analytic gradients.

Gradients are taken with respect to the real and imaginary parts of E and
returned packed as one complex field g = dL/dRe(E) + j dL/dIm(E).
"""

from typing import Optional, Union
import logging
import numpy as np

from emfield.core.errors import GridMismatchError, InvalidInputError
from emfield.models.field import ComplexField, ContrastMap, MapUnit, RealMap
from emfield.models.loss import LossBreakdown, LossWeights
from emfield.physics.greens_operator import WKernel

logger = logging.getLogger(__name__)

FieldLike = Union[np.ndarray, RealMap, ComplexField]


# ---------------------------------------------------------------------------
# Five-point stencil with replicate padding
# ---------------------------------------------------------------------------

def laplacian_array(values: np.ndarray) -> np.ndarray:
    """f(i+1,j) + f(i-1,j) + f(i,j+1) + f(i,j-1) - 4 f(i,j), in pixel units"""
    padded = np.pad(values, 1, mode="edge")
    return (
        padded[2:, 1:-1] + padded[:-2, 1:-1]
        + padded[1:-1, 2:] + padded[1:-1, :-2]
        - 4.0 * values
    )


def laplacian_adjoint_array(values: np.ndarray) -> np.ndarray:
    """Exact transpose of laplacian_array (scatter, then fold the padding back)"""
    h, w = values.shape
    scattered = np.zeros((h + 2, w + 2), dtype=values.dtype)
    scattered[2:, 1:-1] += values
    scattered[:-2, 1:-1] += values
    scattered[1:-1, 2:] += values
    scattered[1:-1, :-2] += values

    out = scattered[1:-1, 1:-1] - 4.0 * values
    # Edge padding copies row 0 / row H-1 / col 0 / col W-1 outward
    out[0, :] += scattered[0, 1:-1]
    out[-1, :] += scattered[-1, 1:-1]
    out[:, 0] += scattered[1:-1, 0]
    out[:, -1] += scattered[1:-1, -1]
    return out


def laplacian_5pt(field: FieldLike) -> FieldLike:
    if isinstance(field, ComplexField):
        return field.with_values(laplacian_array(field.values))
    if isinstance(field, RealMap):
        return RealMap(grid=field.grid, values=laplacian_array(field.values), unit=MapUnit.LINEAR)
    return laplacian_array(np.asarray(field))


def helmholtz_array(values: np.ndarray, weights: LossWeights) -> np.ndarray:
    return laplacian_array(values) + weights.pde_sign * weights.beta * values


def helmholtz_adjoint_array(values: np.ndarray, weights: LossWeights) -> np.ndarray:
    return laplacian_adjoint_array(values) + weights.pde_sign * weights.beta * values


def _mask_array(mask: Optional[np.ndarray], shape) -> Optional[np.ndarray]:
    if mask is None:
        return None
    arr = np.asarray(mask, dtype=np.float64)
    if arr.shape != shape:
        raise InvalidInputError(f"mask shape {arr.shape} does not match field {shape}")
    return arr


# ---------------------------------------------------------------------------
# PDE loss
# ---------------------------------------------------------------------------

def pde_residual_values(values: np.ndarray, weights: LossWeights, mask=None) -> np.ndarray:
    residual = helmholtz_array(values, weights)
    squared = residual.real ** 2 + residual.imag ** 2
    if mask is not None:
        squared = squared * mask
    return squared


def pde_residual_map(
    field: ComplexField, weights: LossWeights, mask: Optional[np.ndarray] = None
) -> RealMap:
    """Per-cell (lap Re E + s beta Re E)^2 + (lap Im E + s beta Im E)^2"""
    m = _mask_array(mask, field.shape)
    return RealMap(
        grid=field.grid,
        values=pde_residual_values(field.values, weights, m),
        unit=MapUnit.LINEAR,
    )


def loss_pde(field: ComplexField, weights: LossWeights, mask: Optional[np.ndarray] = None) -> float:
    m = _mask_array(mask, field.shape)
    return float(np.mean(pde_residual_values(field.values, weights, m)))


def pde_gradient_values(values: np.ndarray, weights: LossWeights, mask=None) -> np.ndarray:
    residual = helmholtz_array(values, weights)
    if mask is not None:
        residual = residual * mask
    return (2.0 / values.size) * helmholtz_adjoint_array(residual, weights)


def grad_loss_pde(
    field: ComplexField, weights: LossWeights, mask: Optional[np.ndarray] = None
) -> ComplexField:
    """(2/N) L^T (L E) applied to Re and Im separately (L is real)"""
    m = _mask_array(mask, field.shape)
    return field.with_values(pde_gradient_values(field.values, weights, m))


# ---------------------------------------------------------------------------
# VIE loss
# ---------------------------------------------------------------------------

def _check_grids(kernel: WKernel, *items):
    for item in items:
        if item.grid != kernel.grid:
            raise GridMismatchError("kernel and loss operands")


def vie_residual_array(
    kernel: WKernel, chi: np.ndarray, values: np.ndarray, incident: np.ndarray
) -> np.ndarray:
    return values + kernel.apply_array(chi * values) - incident


def vie_adjoint_array(kernel: WKernel, chi: np.ndarray, residual: np.ndarray) -> np.ndarray:
    """(I + W chi)^H R = R + conj(chi) * (W^H R)"""
    return residual + np.conj(chi) * kernel.apply_adjoint_array(residual)


def vie_residual_field(
    kernel: WKernel, contrast: ContrastMap, field: ComplexField, incident: ComplexField
) -> ComplexField:
    """R = (I + W chi) E - E_inc"""
    _check_grids(kernel, contrast, field, incident)
    return field.with_values(
        vie_residual_array(kernel, contrast.values, field.values, incident.values)
    )


def loss_vie(
    kernel: WKernel, contrast: ContrastMap, field: ComplexField, incident: ComplexField
) -> float:
    """(1/N) ||R||^2"""
    residual = vie_residual_field(kernel, contrast, field, incident).values
    return float(np.mean(residual.real ** 2 + residual.imag ** 2))


def grad_loss_vie(
    kernel: WKernel, contrast: ContrastMap, field: ComplexField, incident: ComplexField
) -> ComplexField:
    """(2/N) (I + W chi)^H R"""
    _check_grids(kernel, contrast, field, incident)
    residual = vie_residual_array(kernel, contrast.values, field.values, incident.values)
    grad = (2.0 / residual.size) * vie_adjoint_array(kernel, contrast.values, residual)
    return field.with_values(grad)


# ---------------------------------------------------------------------------
# Data and composite loss
# ---------------------------------------------------------------------------

def loss_data(prediction: RealMap, target: RealMap) -> float:
    """Mean squared error between maps (1/N normalization)"""
    if prediction.grid != target.grid:
        raise GridMismatchError("prediction and target maps")
    diff = prediction.values - target.values
    return float(np.mean(diff * diff))


def loss_composite(
    kernel: WKernel,
    contrast: ContrastMap,
    field: ComplexField,
    incident: ComplexField,
    weights: Optional[LossWeights] = None,
    prediction: Optional[RealMap] = None,
    target: Optional[RealMap] = None,
    mask: Optional[np.ndarray] = None,
) -> LossBreakdown:
    """lambda_pde * L_pde + lambda_vie * L_vie (+ L_data when maps are given)"""
    weights = weights or LossWeights()
    if (prediction is None) != (target is None):
        raise InvalidInputError("prediction and target must be supplied together")
    pde = loss_pde(field, weights, mask)
    vie = loss_vie(kernel, contrast, field, incident)
    data = loss_data(prediction, target) if prediction is not None else None
    return LossBreakdown.combine(pde, vie, weights, data)
