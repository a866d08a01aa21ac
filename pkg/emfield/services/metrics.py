"""
Evaluation metrics over pairs of real maps: NMSE (linear and dB), RMSE, MAE, SSIM.
"""

from typing import Literal, Optional
import logging
import numpy as np
from scipy.ndimage import uniform_filter

from emfield.core.errors import GridMismatchError, InvalidInputError
from emfield.models.field import RealMap
from emfield.models.report import MetricsReport

logger = logging.getLogger(__name__)

# (0.01 L)^2 and (0.03 L)^2 with dynamic range L = 1 for normalized maps
DEFAULT_C1 = 1e-4
DEFAULT_C2 = 9e-4
DEFAULT_WINDOW = 11

SsimMode = Literal["global", "windowed"]


def _pair(pred: RealMap, truth: RealMap):
    if pred.grid != truth.grid or pred.shape != truth.shape:
        raise GridMismatchError("prediction and ground-truth maps")
    return pred.values, truth.values


def nmse(pred: RealMap, truth: RealMap) -> float:
    """sum (pred - truth)^2 / sum truth^2"""
    p, t = _pair(pred, truth)
    energy = float(np.sum(t * t))
    if energy == 0.0:
        raise InvalidInputError("NMSE is undefined for an all-zero ground-truth map")
    diff = p - t
    return float(np.sum(diff * diff)) / energy


def nmse_db(pred: RealMap, truth: RealMap) -> float:
    value = nmse(pred, truth)
    return 10.0 * np.log10(value) if value > 0.0 else float("-inf")


def rmse(pred: RealMap, truth: RealMap) -> float:
    p, t = _pair(pred, truth)
    diff = p - t
    return float(np.sqrt(np.mean(diff * diff)))


def mae(pred: RealMap, truth: RealMap) -> float:
    p, t = _pair(pred, truth)
    return float(np.mean(np.abs(p - t)))


def _ssim_formula(mu_x, mu_y, var_x, var_y, cov, c1, c2):
    return ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )


def ssim(
    pred: RealMap,
    truth: RealMap,
    c1: Optional[float] = None,
    c2: Optional[float] = None,
    mode: SsimMode = "global",
    window: int = DEFAULT_WINDOW,
) -> float:
    """Structural similarity with population (1/N) moments.

    global:   one evaluation over whole-map statistics.
    windowed: mean over every fully contained window x window patch (uniform weights).
    """
    c1 = DEFAULT_C1 if c1 is None else c1
    c2 = DEFAULT_C2 if c2 is None else c2
    if c1 <= 0 or c2 <= 0:
        raise InvalidInputError("SSIM constants must be positive")
    x, y = _pair(pred, truth)

    if mode == "global":
        mu_x, mu_y = x.mean(), y.mean()
        dx, dy = x - mu_x, y - mu_y
        value = _ssim_formula(
            mu_x, mu_y, np.mean(dx * dx), np.mean(dy * dy), np.mean(dx * dy), c1, c2
        )
        return float(value)

    if mode != "windowed":
        raise InvalidInputError(f"unknown SSIM mode '{mode}'")
    if window < 1 or window % 2 == 0:
        raise InvalidInputError("SSIM window side must be a positive odd number")
    if x.shape[0] < window or x.shape[1] < window:
        raise InvalidInputError(f"map {x.shape} is smaller than the {window}x{window} SSIM window")

    def local_mean(a):
        return uniform_filter(a, size=window, mode="reflect")

    mu_x, mu_y = local_mean(x), local_mean(y)
    var_x = local_mean(x * x) - mu_x * mu_x
    var_y = local_mean(y * y) - mu_y * mu_y
    cov = local_mean(x * y) - mu_x * mu_y
    ssim_map = _ssim_formula(mu_x, mu_y, var_x, var_y, cov, c1, c2)

    # Keep only windows that lie entirely inside the map
    half = window // 2
    return float(np.mean(ssim_map[half:x.shape[0] - half, half:x.shape[1] - half]))


def evaluate_maps(
    pred: RealMap,
    truth: RealMap,
    ssim_mode: SsimMode = "global",
    c1: Optional[float] = None,
    c2: Optional[float] = None,
    window: int = DEFAULT_WINDOW,
) -> MetricsReport:
    """All four metrics in one report"""
    value = nmse(pred, truth)
    report = MetricsReport(
        nmse=value,
        nmse_db=10.0 * np.log10(value) if value > 0.0 else float("-inf"),
        rmse=rmse(pred, truth),
        mae=mae(pred, truth),
        ssim=min(1.0, max(-1.0, ssim(pred, truth, c1, c2, mode=ssim_mode, window=window))),
        ssim_mode=ssim_mode,
    )
    logger.debug(f"Metrics: nmse_db={report.nmse_db:.3f}, ssim={report.ssim:.4f}")
    return report
