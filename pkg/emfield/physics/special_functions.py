"""
Cylindrical Bessel and Hankel functions of orders 0 and 1 for real arguments.

Arguments up to SERIES_SWITCH use the ascending power series (A&S 9.1.10,
9.1.11); beyond it the Hankel asymptotic expansion (A&S 9.2.5-9.2.10) is
truncated at its smallest term. Both accept scalars or numpy arrays and
return the same shape (Python floats/complex for scalar input).
"""

from typing import Tuple, Union
import numpy as np

from emfield.core.errors import InvalidInputError

ArrayLike = Union[float, np.ndarray]

SERIES_SWITCH = 12.0

_EULER_GAMMA = 0.57721566490153286061
_TWO_OVER_PI = 2.0 / np.pi
_SERIES_TERMS = 48
# Terms shrink up to index ~2x, so 24 is the optimal cut at the switch radius
_ASYMPTOTIC_TERMS = 24


def _argument(x: ArrayLike, allow_zero: bool) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("Bessel/Hankel argument must be finite")
    if allow_zero:
        if np.any(arr < 0):
            raise InvalidInputError("Bessel argument must be >= 0")
    elif np.any(arr <= 0):
        raise InvalidInputError("Hankel argument must be > 0 (singular at the origin)")
    return arr


def _series(x: np.ndarray, with_y: bool) -> Tuple[np.ndarray, ...]:
    """Ascending series for J0, J1 (and Y0, Y1 when with_y); x > 0 for Y."""
    half = 0.5 * x
    q = -half * half
    term = np.ones_like(x)
    harmonic = 0.0

    j0 = term.copy()
    j1 = term.copy()
    y0_sum = np.zeros_like(x)
    # k = 0 coefficient of the Y1 sum: psi(1) + psi(2) = 1 - 2*gamma
    y1_sum = (1.0 - 2.0 * _EULER_GAMMA) * term

    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        j0 += term
        odd = term / (k + 1)
        j1 += odd
        if with_y:
            y0_sum += harmonic * term
            y1_sum += (2.0 * harmonic + 1.0 / (k + 1) - 2.0 * _EULER_GAMMA) * odd

    j1 = half * j1
    if not with_y:
        return j0, j1

    log_half = np.log(half)
    y0 = _TWO_OVER_PI * ((log_half + _EULER_GAMMA) * j0 - y0_sum)
    y1 = _TWO_OVER_PI * log_half * j1 - _TWO_OVER_PI / x - (half / np.pi) * y1_sum
    return j0, j1, y0, y1


def _asymptotic(x: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """(J_order, Y_order) for large x from the P/Q Hankel expansion"""
    mu = 4.0 * order * order
    eight_x = 8.0 * x
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term = term * (mu - (2 * k - 1) ** 2) / (k * eight_x)
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += term if (k // 2) % 2 == 0 else -term
    chi = x - (0.5 * order + 0.25) * np.pi
    amp = np.sqrt(_TWO_OVER_PI / x)
    cos_chi = np.cos(chi)
    sin_chi = np.sin(chi)
    return amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi)


def _evaluate(x: np.ndarray, order: int, kind: str) -> np.ndarray:
    out = np.empty_like(x)
    small = x <= SERIES_SWITCH
    large = ~small

    if np.any(small):
        xs = x[small]
        if kind == "j":
            j0, j1 = _series(xs, with_y=False)
            out[small] = j0 if order == 0 else j1
        else:
            _, _, y0, y1 = _series(xs, with_y=True)
            out[small] = y0 if order == 0 else y1
    if np.any(large):
        j, y = _asymptotic(x[large], order)
        out[large] = j if kind == "j" else y
    return out


def _hankel(x: np.ndarray, order: int) -> np.ndarray:
    out = np.empty(x.shape, dtype=np.complex128)
    small = x <= SERIES_SWITCH
    large = ~small
    if np.any(small):
        j0, j1, y0, y1 = _series(x[small], with_y=True)
        out[small] = (j0 - 1j * y0) if order == 0 else (j1 - 1j * y1)
    if np.any(large):
        j, y = _asymptotic(x[large], order)
        out[large] = j - 1j * y
    return out


def _shaped(result: np.ndarray, original: ArrayLike):
    if np.ndim(original) == 0:
        return result.item()
    return result


def bessel_j0(x: ArrayLike):
    arr = _argument(x, allow_zero=True)
    return _shaped(_evaluate(np.atleast_1d(arr), 0, "j").reshape(arr.shape), x)


def bessel_j1(x: ArrayLike):
    arr = _argument(x, allow_zero=True)
    return _shaped(_evaluate(np.atleast_1d(arr), 1, "j").reshape(arr.shape), x)


def bessel_y0(x: ArrayLike):
    arr = _argument(x, allow_zero=False)
    return _shaped(_evaluate(np.atleast_1d(arr), 0, "y").reshape(arr.shape), x)


def bessel_y1(x: ArrayLike):
    arr = _argument(x, allow_zero=False)
    return _shaped(_evaluate(np.atleast_1d(arr), 1, "y").reshape(arr.shape), x)


def hankel2_0(x: ArrayLike):
    """H0^(2)(x) = J0(x) - j*Y0(x)"""
    arr = _argument(x, allow_zero=False)
    return _shaped(_hankel(np.atleast_1d(arr), 0).reshape(arr.shape), x)


def hankel2_1(x: ArrayLike):
    """H1^(2)(x) = J1(x) - j*Y1(x)"""
    arr = _argument(x, allow_zero=False)
    return _shaped(_hankel(np.atleast_1d(arr), 1).reshape(arr.shape), x)
