"""
Field reconstruction by gradient descent on the composite physics loss.

Starts from E_inc and takes steepest-descent steps with Armijo backtracking
(sufficient-decrease constant c, step halving).
"""

from typing import Optional, Tuple
import logging
import time
import numpy as np

from emfield.core.errors import GridMismatchError, IllPosedObjectiveError, NumericalBreakdownError
from emfield.models.field import ComplexField, ContrastMap
from emfield.models.loss import LossBreakdown, LossWeights
from emfield.models.optimizer import OptimizerConfig
from emfield.models.report import ReconstructionReport
from emfield.physics.greens_operator import WKernel
from emfield.physics.losses import (
    pde_gradient_values,
    pde_residual_values,
    vie_adjoint_array,
    vie_residual_array,
)

logger = logging.getLogger(__name__)


class PhysicsObjective:
    """Composite loss over raw arrays; caches the last VIE residual for the gradient"""

    def __init__(self, kernel: WKernel, chi: np.ndarray, incident: np.ndarray,
                 weights: LossWeights, mask: Optional[np.ndarray] = None):
        self.kernel = kernel
        self.chi = chi
        self.incident = incident
        self.weights = weights
        self.mask = mask
        self._cache = None

    def breakdown(self, values: np.ndarray) -> LossBreakdown:
        w = self.weights
        residual = vie_residual_array(self.kernel, self.chi, values, self.incident)
        self._cache = (values, residual)
        vie = float(np.mean(residual.real ** 2 + residual.imag ** 2))
        pde = float(np.mean(pde_residual_values(values, w, self.mask)))
        if not (np.isfinite(vie) and np.isfinite(pde)):
            raise NumericalBreakdownError("physics loss became non-finite")
        return LossBreakdown.combine(pde, vie, w)

    def gradient(self, values: np.ndarray) -> np.ndarray:
        w = self.weights
        if self._cache is not None and self._cache[0] is values:
            residual = self._cache[1]
        else:
            residual = vie_residual_array(self.kernel, self.chi, values, self.incident)
        grad = np.zeros_like(values)
        if w.lambda_vie > 0:
            grad += w.lambda_vie * (2.0 / values.size) * vie_adjoint_array(self.kernel, self.chi, residual)
        if w.lambda_pde > 0:
            grad += w.lambda_pde * pde_gradient_values(values, w, self.mask)
        return grad


def reconstruct_field(
    kernel: WKernel,
    contrast: ContrastMap,
    incident: ComplexField,
    weights: Optional[LossWeights] = None,
    cfg: Optional[OptimizerConfig] = None,
    mask: Optional[np.ndarray] = None,
) -> Tuple[ComplexField, ReconstructionReport]:
    weights = weights or LossWeights()
    cfg = cfg or OptimizerConfig()
    for item in (contrast, incident):
        if item.grid != kernel.grid:
            raise GridMismatchError("kernel and reconstruction operands")
    if weights.lambda_vie == 0.0 and weights.lambda_pde > 0.0:
        raise IllPosedObjectiveError(
            "lambda_vie = 0 with lambda_pde > 0 is ill-posed: the PDE loss alone is minimized by E = 0"
        )
    if mask is not None:
        mask = np.asarray(mask, dtype=np.float64)

    started = time.perf_counter()
    objective = PhysicsObjective(kernel, contrast.values, incident.values, weights, mask)
    values = incident.values.copy()
    current = objective.breakdown(values)
    grad = objective.gradient(values)
    grad_norm = float(np.linalg.norm(grad))
    history = [current]
    iterations = 0
    converged = False
    stop_reason = "max_iters"
    next_step = cfg.step_init

    logger.info(
        f"Reconstruction start: composite={current.composite:.6e}, "
        f"lambda_pde={weights.lambda_pde}, lambda_vie={weights.lambda_vie}"
    )

    while True:
        if current.composite == 0.0:
            converged, stop_reason = True, "zero_loss"
            break
        if grad_norm <= cfg.grad_tol:
            converged, stop_reason = True, "grad_tol"
            break
        if iterations >= cfg.max_iters:
            break

        step = next_step
        accepted = None
        if cfg.line_search:
            threshold = cfg.armijo_c * grad_norm * grad_norm
            for _ in range(cfg.max_backtracks):
                candidate = values - step * grad
                trial = objective.breakdown(candidate)
                if trial.composite <= current.composite - step * threshold:
                    accepted = (candidate, trial)
                    break
                step *= 0.5
            if accepted is None:
                stop_reason = "line_search"
                logger.warning("Line search failed to find a descent step")
                break
        else:
            candidate = values - step * grad
            accepted = (candidate, objective.breakdown(candidate))

        previous = current
        values, current = accepted
        if cfg.line_search:
            next_step = step * cfg.step_growth
        grad = objective.gradient(values)
        grad_norm = float(np.linalg.norm(grad))
        history.append(current)
        iterations += 1
        if iterations % 500 == 0:
            logger.debug(f"iter {iterations}: composite={current.composite:.6e}, |g|={grad_norm:.3e}")

        decrease = previous.composite - current.composite
        if 0.0 <= decrease <= cfg.loss_tol * previous.composite:
            converged, stop_reason = True, "loss_tol"
            break

    if not converged and grad_norm <= cfg.grad_tol:
        converged, stop_reason = True, "grad_tol"

    report = ReconstructionReport(
        loss_history=history,
        iterations=iterations,
        converged=converged,
        final_grad_norm=grad_norm,
        stop_reason=stop_reason,
        wall_time=time.perf_counter() - started,
    )
    log = logger.info if converged else logger.warning
    log(
        f"Reconstruction {'converged' if converged else 'stopped'} after {iterations} iterations "
        f"({stop_reason}), composite={current.composite:.6e}"
    )
    return incident.with_values(values), report
