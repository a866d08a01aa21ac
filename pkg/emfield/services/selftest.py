"""
Oracle checks on small random instances: special functions against scipy,
FFT operator against the dense matrix, analytic gradients against central
differences, iterative solve against a direct solve.
"""

from typing import Callable, List
import logging
import numpy as np
from pydantic import BaseModel
from scipy import special

from emfield.models.field import ComplexField, ContrastMap
from emfield.models.grid import GridSpec, make_grid
from emfield.models.loss import LossWeights
from emfield.physics import special_functions as sf
from emfield.physics.forward_solver import solve_forward
from emfield.physics.greens_operator import build_dense_w, build_w_kernel
from emfield.physics.losses import grad_loss_pde, grad_loss_vie, loss_pde, loss_vie
from emfield.services.synthetic import SYNTHETIC_K0_PIXEL, frequency_for

logger = logging.getLogger(__name__)

SPECIAL_TOL = 1e-10
OPERATOR_TOL = 1e-10
ADJOINT_TOL = 1e-12
GRADIENT_TOL = 1e-5
SOLVER_TOL = 1e-8
FD_STEP = 1e-4


class CheckResult(BaseModel):
    name: str
    passed: bool
    error: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name:32s} error={self.error:.3e} (<= {self.threshold:.0e})"
        return text + (f"  {self.detail}" if self.detail else "")


def selftest_grid(size: int) -> GridSpec:
    return make_grid(size, size, 1.0, frequency_for(SYNTHETIC_K0_PIXEL, 1.0))


def random_field(grid: GridSpec, rng: np.random.Generator) -> ComplexField:
    return ComplexField(
        grid=grid, values=rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    )


def random_contrast(grid: GridSpec, rng: np.random.Generator) -> ContrastMap:
    """Passive random contrast (Im <= 0) on about half of the cells"""
    occupied = rng.random(grid.shape) < 0.5
    values = rng.uniform(0.0, 1.0, grid.shape) - 1j * rng.uniform(0.0, 0.2, grid.shape)
    return ContrastMap(grid=grid, values=np.where(occupied, values, 0.0))


def block_contrast(grid: GridSpec, side: int, value: complex) -> ContrastMap:
    """Centered side x side block of constant contrast"""
    values = np.zeros(grid.shape, dtype=np.complex128)
    r0 = (grid.height - side) // 2
    c0 = (grid.width - side) // 2
    values[r0:r0 + side, c0:c0 + side] = value
    return ContrastMap(grid=grid, values=values)


def directional_gradient_error(
    loss: Callable[[ComplexField], float],
    gradient: Callable[[ComplexField], ComplexField],
    field: ComplexField,
    direction: np.ndarray,
    step: float = FD_STEP,
) -> float:
    """Relative gap between <grad, d> and the central difference of loss along d"""
    analytic_grad = gradient(field).values
    analytic = float(np.sum(analytic_grad.real * direction.real + analytic_grad.imag * direction.imag))
    plus = loss(field.with_values(field.values + step * direction))
    minus = loss(field.with_values(field.values - step * direction))
    numeric = (plus - minus) / (2.0 * step)
    scale = max(abs(analytic), abs(numeric), 1e-300)
    return abs(numeric - analytic) / scale


def _check_special_functions() -> CheckResult:
    x = np.geomspace(0.01, 100.0, 20)
    pairs = [
        (sf.bessel_j0(x), special.j0(x)),
        (sf.bessel_j1(x), special.j1(x)),
        (sf.bessel_y0(x), special.y0(x)),
        (sf.bessel_y1(x), special.y1(x)),
        (sf.hankel2_0(x), special.hankel2(0, x)),
        (sf.hankel2_1(x), special.hankel2(1, x)),
    ]
    error = max(float(np.max(np.abs(ours - ref) / np.maximum(1.0, np.abs(ref)))) for ours, ref in pairs)
    wronskian = sf.bessel_j1(x) * sf.bessel_y0(x) - sf.bessel_j0(x) * sf.bessel_y1(x)
    w_error = float(np.max(np.abs(wronskian - 2.0 / (np.pi * x)) * (np.pi * x / 2.0)))
    error = max(error, w_error)
    return CheckResult(
        name="special functions vs scipy",
        passed=error <= SPECIAL_TOL,
        error=error,
        threshold=SPECIAL_TOL,
        detail="J0 J1 Y0 Y1 H0 H1 + Wronskian",
    )


def _check_operator(size: int, rng: np.random.Generator) -> List[CheckResult]:
    grid = selftest_grid(size)
    kernel = build_w_kernel(grid)
    dense = build_dense_w(grid, kernel).matrix

    error = 0.0
    for _ in range(5):
        x = random_field(grid, rng).values
        fast = kernel.apply_array(x).ravel()
        exact = dense @ x.ravel()
        error = max(error, float(np.linalg.norm(fast - exact) / np.linalg.norm(exact)))

    x = random_field(grid, rng).values
    y = random_field(grid, rng).values
    wx = kernel.apply_array(x)
    whx = kernel.apply_adjoint_array(y)
    gap = abs(np.vdot(y, wx) - np.vdot(whx, x)) / (np.linalg.norm(wx) * np.linalg.norm(y))
    return [
        CheckResult(name="FFT apply_w vs dense", passed=error <= OPERATOR_TOL, error=error, threshold=OPERATOR_TOL),
        CheckResult(name="adjoint identity", passed=gap <= ADJOINT_TOL, error=float(gap), threshold=ADJOINT_TOL),
    ]


def _check_gradients(rng: np.random.Generator) -> List[CheckResult]:
    grid = selftest_grid(8)
    kernel = build_w_kernel(grid)
    contrast = random_contrast(grid, rng)
    incident = random_field(grid, rng)
    field = random_field(grid, rng)
    results = []

    vie_error = max(
        directional_gradient_error(
            lambda e: loss_vie(kernel, contrast, e, incident),
            lambda e: grad_loss_vie(kernel, contrast, e, incident),
            field,
            random_field(grid, rng).values,
        )
        for _ in range(3)
    )
    results.append(CheckResult(
        name="grad L_vie vs finite differences", passed=vie_error <= GRADIENT_TOL,
        error=vie_error, threshold=GRADIENT_TOL,
    ))

    for sign in (-1, 1):
        weights = LossWeights(pde_sign=sign)
        pde_error = max(
            directional_gradient_error(
                lambda e: loss_pde(e, weights),
                lambda e: grad_loss_pde(e, weights),
                field,
                random_field(grid, rng).values,
            )
            for _ in range(3)
        )
        results.append(CheckResult(
            name=f"grad L_pde (sign {sign:+d}) vs FD", passed=pde_error <= GRADIENT_TOL,
            error=pde_error, threshold=GRADIENT_TOL,
        ))
    return results


def _check_solver(size: int, rng: np.random.Generator) -> List[CheckResult]:
    grid = selftest_grid(size)
    kernel = build_w_kernel(grid)
    contrast = block_contrast(grid, max(1, size // 4), 0.5)
    incident = random_field(grid, rng)

    field, report = solve_forward(kernel, contrast, incident, tol=1e-10)
    dense = build_dense_w(grid, kernel).matrix
    system = np.eye(grid.n_cells) + dense * contrast.values.ravel()[None, :]
    direct = np.linalg.solve(system, incident.values.ravel())
    error = float(np.linalg.norm(field.values.ravel() - direct) / np.linalg.norm(direct))

    free, _ = solve_forward(kernel, ContrastMap.free_space(grid), incident)
    identity_error = float(np.max(np.abs(free.values - incident.values)))
    identity_error = max(identity_error, loss_vie(kernel, ContrastMap.free_space(grid), free, incident))
    return [
        CheckResult(
            name="GMRES vs direct solve", passed=report.converged and error <= SOLVER_TOL,
            error=error, threshold=SOLVER_TOL, detail=f"{report.iterations} iterations",
        ),
        CheckResult(
            name="free-space identity", passed=identity_error == 0.0,
            error=identity_error, threshold=0.0,
        ),
    ]


def run_selftest(size: int = 12, seed: int = 7) -> List[CheckResult]:
    """Run every oracle check; a check that raises is reported as failed"""
    rng = np.random.default_rng(seed)
    checks = [
        ("special functions", lambda: [_check_special_functions()]),
        ("operator", lambda: _check_operator(size, rng)),
        ("gradients", lambda: _check_gradients(rng)),
        ("solver", lambda: _check_solver(size, rng)),
    ]
    results: List[CheckResult] = []
    for name, check in checks:
        try:
            results.extend(check())
        except Exception as e:
            logger.error(f"Error in {name} check: {e}")
            results.append(CheckResult(name=name, passed=False, error=float("inf"), threshold=0.0, detail=str(e)))
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning(f"Self-test failures: {failed}")
    return results
