# EMField physics package
"""
Green's operator, forward solver, physics losses and field reconstruction
"""

from .materials import contrast_from_materials
from .greens_operator import (
    WKernel,
    DenseW,
    build_w_kernel,
    build_dense_w,
    apply_w,
    apply_w_adjoint,
    incident_field,
)
from .forward_solver import solve_forward, forward_residual
from .reconstructor import reconstruct_field

__all__ = [
    "contrast_from_materials",
    "WKernel",
    "DenseW",
    "build_w_kernel",
    "build_dense_w",
    "apply_w",
    "apply_w_adjoint",
    "incident_field",
    "solve_forward",
    "forward_residual",
    "reconstruct_field",
]
