"""
Forward solve of (I + W chi) E_tot = E_inc with restarted GMRES.

The operator is complex symmetric, not Hermitian, so CG does not apply.
Each restart cycle is one scipy GMRES call; the true residual is checked
after every cycle and only non-increasing iterates are accepted.
"""

from typing import Optional, Tuple
import logging
import time
import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from emfield.core.config import settings
from emfield.core.errors import GridMismatchError, InvalidInputError, NumericalBreakdownError
from emfield.models.field import ComplexField, ContrastMap
from emfield.models.report import SolveReport
from emfield.physics.greens_operator import WKernel

logger = logging.getLogger(__name__)

STAGNATION_WINDOW = 20
STAGNATION_RATIO = 0.99


def _check_grids(kernel: WKernel, *items):
    for item in items:
        if item.grid != kernel.grid:
            raise GridMismatchError("kernel and solver operands")


def _system_matvec(kernel: WKernel, chi: np.ndarray, values: np.ndarray) -> np.ndarray:
    return values + kernel.apply_array(chi * values)


def forward_residual(
    kernel: WKernel, contrast: ContrastMap, field: ComplexField, incident: ComplexField
) -> float:
    """||(I + W chi) E - E_inc|| / ||E_inc|| (absolute norm when E_inc = 0)"""
    _check_grids(kernel, contrast, field, incident)
    residual = _system_matvec(kernel, contrast.values, field.values) - incident.values
    scale = np.linalg.norm(incident.values)
    norm = float(np.linalg.norm(residual))
    return norm / scale if scale > 0 else norm


def solve_forward(
    kernel: WKernel,
    contrast: ContrastMap,
    incident: ComplexField,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    restart: Optional[int] = None,
) -> Tuple[ComplexField, SolveReport]:
    """Total field for the given contrast and excitation.

    Non-convergence is not an error: the best iterate is returned with
    converged=False.
    """
    tol = settings.SOLVER_TOL if tol is None else tol
    max_iter = settings.SOLVER_MAX_ITER if max_iter is None else max_iter
    restart = settings.SOLVER_RESTART if restart is None else restart
    if not 0.0 < tol < 1.0:
        raise InvalidInputError(f"tol must lie in (0, 1), got {tol}")
    if max_iter < 1 or restart < 1:
        raise InvalidInputError("max_iter and restart must be >= 1")
    _check_grids(kernel, contrast, incident)

    started = time.perf_counter()
    grid = kernel.grid
    shape = grid.shape
    n = grid.n_cells
    chi = contrast.values
    b = incident.values.ravel()
    b_norm = float(np.linalg.norm(b))

    def report(iterations, residual, converged, history, restarts):
        return SolveReport(
            iterations=iterations,
            final_residual=residual,
            converged=converged,
            wall_time=time.perf_counter() - started,
            tolerance=tol,
            residual_history=history,
            restarts=restarts,
            k0_pixel=grid.k0_pixel,
        )

    if b_norm == 0.0:
        return ComplexField.zeros(grid), report(0, 0.0, True, [0.0], 0)
    if contrast.is_free_space():
        return incident.with_values(b.reshape(shape)), report(0, 0.0, True, [0.0], 0)

    def true_residual(x: np.ndarray) -> float:
        r = _system_matvec(kernel, chi, x.reshape(shape)).ravel() - b
        return float(np.linalg.norm(r)) / b_norm

    # Born start
    best = b.copy()
    best_residual = true_residual(best)
    history = [best_residual]
    if best_residual <= tol:
        logger.debug("Initial iterate already satisfies the tolerance")
        return incident.with_values(best.reshape(shape)), report(0, best_residual, True, history, 0)

    operator = LinearOperator(
        (n, n),
        matvec=lambda v: _system_matvec(kernel, chi, v.reshape(shape)).ravel(),
        dtype=np.complex128,
    )

    logger.info(f"Forward solve on {shape[0]}x{shape[1]} grid, tol={tol:g}, max_iter={max_iter}")
    iterations = 0
    restarts = 0
    cycle = min(restart, n)
    # (iteration count, residual) checkpoints for stagnation detection
    checkpoints = [(0, best_residual)]

    while iterations < max_iter:
        m = min(cycle, max_iter - iterations)
        inner = [0]

        def count(_pr_norm):
            inner[0] += 1

        candidate, _info = gmres(
            operator, b, x0=best.copy(), rtol=tol, atol=0.0,
            restart=m, maxiter=1, callback=count, callback_type="pr_norm",
        )
        if not np.all(np.isfinite(candidate)):
            raise NumericalBreakdownError("GMRES produced a non-finite iterate")
        iterations += max(inner[0], 1)

        residual = true_residual(candidate)
        if residual <= best_residual:
            best, best_residual = candidate, residual
            history.append(residual)
        logger.debug(f"cycle done: {iterations} iterations, residual {best_residual:.3e}")
        if best_residual <= tol:
            break

        checkpoints.append((iterations, best_residual))
        window = [r for it, r in checkpoints if iterations - it >= STAGNATION_WINDOW]
        if window and best_residual > STAGNATION_RATIO * window[-1] and cycle < n:
            cycle = min(2 * cycle, n)
            restarts += 1
            checkpoints = [(iterations, best_residual)]
            logger.warning(f"Solver stagnating at {best_residual:.3e}; restart length -> {cycle}")

    converged = best_residual <= tol
    if not converged:
        logger.warning(
            f"Forward solve did not converge in {iterations} iterations "
            f"(residual {best_residual:.3e} > {tol:g})"
        )
    else:
        logger.info(f"Forward solve converged in {iterations} iterations, residual {best_residual:.3e}")
    return (
        incident.with_values(best.reshape(shape)),
        report(iterations, best_residual, converged, history, restarts),
    )
