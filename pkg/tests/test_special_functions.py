import numpy as np
import pytest
from scipy import special

from emfield.core.errors import InvalidInputError
from emfield.physics import special_functions as sf
from emfield.physics.special_functions import SERIES_SWITCH


def _scaled_error(ours, ref):
    return np.abs(np.asarray(ours) - ref) / np.maximum(1.0, np.abs(ref))


def test_known_values():
    assert sf.bessel_j0(0.0) == 1.0
    assert sf.bessel_j1(0.0) == 0.0
    assert abs(sf.bessel_j0(2.404825557695773)) <= 1e-12
    assert sf.bessel_j0(10.0) == pytest.approx(special.j0(10.0), abs=1e-12)
    assert sf.bessel_j1(5.0) == pytest.approx(special.j1(5.0), abs=1e-12)


def test_j1_small_argument_series():
    x = 1e-4
    assert sf.bessel_j1(x) == pytest.approx(x / 2 - x ** 3 / 16, rel=1e-15)


def test_scalar_and_array_shapes():
    assert isinstance(sf.bessel_j0(1.0), float)
    assert isinstance(sf.hankel2_0(1.0), complex)
    grid = np.linspace(0.5, 30.0, 12).reshape(3, 4)
    assert sf.bessel_y1(grid).shape == (3, 4)
    assert sf.hankel2_1(grid).dtype == np.complex128


@pytest.mark.parametrize(
    "ours, ref, low, band_tol",
    [
        (sf.bessel_j0, special.j0, 0.0, 1e-12),
        (sf.bessel_j1, special.j1, 0.0, 1e-12),
        (sf.bessel_y0, special.y0, 1e-3, 1e-10),
        (sf.bessel_y1, special.y1, 1e-3, 1e-10),
    ],
)
def test_bessel_against_scipy(ours, ref, low, band_tol):
    x = np.concatenate([np.linspace(low, 10.5, 400), np.linspace(20.0, 1000.0, 400)])
    assert np.max(_scaled_error(ours(x), ref(x))) <= 1e-12
    # around the switch: series cancellation below it, smallest asymptotic term above it
    band = np.linspace(10.5, 20.0, 2001)
    assert np.max(_scaled_error(ours(band), ref(band))) <= band_tol


@pytest.mark.parametrize("order", [0, 1])
def test_hankel_against_scipy(order):
    fn = sf.hankel2_0 if order == 0 else sf.hankel2_1
    x = np.geomspace(1e-6, 1000.0, 300)
    ref = special.hankel2(order, x)
    assert np.max(np.abs(fn(x) - ref) / np.abs(ref)) <= 1e-10


def test_hankel_decomposition_and_amplitude():
    for x in (1.0, 2.0, 5.0):
        assert sf.hankel2_0(x).imag == pytest.approx(-sf.bessel_y0(x), rel=1e-15)
        assert sf.hankel2_0(x).real == pytest.approx(sf.bessel_j0(x), rel=1e-15)
    assert abs(sf.hankel2_0(500.0)) == pytest.approx(np.sqrt(2 / (np.pi * 500.0)), rel=1e-3)


def test_wronskian():
    x = np.geomspace(0.01, 100.0, 64)
    w = sf.bessel_j1(x) * sf.bessel_y0(x) - sf.bessel_j0(x) * sf.bessel_y1(x)
    expected = 2.0 / (np.pi * x)
    assert np.max(np.abs(w - expected) / expected) <= 1e-10


def test_j0_derivative_is_minus_j1():
    x = np.linspace(0.3, 40.0, 20)
    h = 1e-6
    derivative = (sf.bessel_j0(x + h) - sf.bessel_j0(x - h)) / (2 * h)
    assert np.max(np.abs(derivative + sf.bessel_j1(x))) <= 1e-6


def test_continuity_across_switch():
    left = np.array([SERIES_SWITCH])
    right = np.nextafter(left, np.inf)
    for fn in (sf.bessel_j0, sf.bessel_j1, sf.bessel_y0, sf.bessel_y1):
        a, b = fn(left), fn(right)
        assert np.all(_scaled_error(a, b) <= 1e-10)


def test_invalid_arguments():
    with pytest.raises(InvalidInputError):
        sf.bessel_j0(-1.0)
    with pytest.raises(InvalidInputError):
        sf.bessel_j1(np.nan)
    with pytest.raises(InvalidInputError):
        sf.hankel2_0(0.0)
    with pytest.raises(InvalidInputError):
        sf.bessel_y0(np.array([1.0, 0.0]))
