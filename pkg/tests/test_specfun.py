import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from kltransform.errors import PoleProximity
from kltransform.specfun import besseli, besselk, gamma, ikernel, kl_kernel, log_gamma, rgamma

# mpmath reference values at 30 digits, frozen
K_REFERENCE = [
    (0.5, 1.0, 0.11993777196806145 + 0j),
    (1 + 2j, 0.3, 0.005627106084666162 + 0.14792433638463032j),
    (0.25 + 1j, 5.0, 0.005991856468076265 + 0.0003061240198351104j),
    (3j, 2.0, 0.009812240011979997 + 0j),
    (-1.5 + 0.5j, 0.05, 2.403127517937534 - 2.5863221009395128j),
    (10 + 20j, 10.0, 1.5454338099482732e-07 - 7.357143929942287e-07j),
    (0.3 + 50j, 1.0, 3.5445936302705124e-35 + 3.244140411310906e-35j),
]
I_REFERENCE = [
    (0.5, 1.0, 2.046236863089055),
    (-3, 2.0, 0.7598786114631139),
    (1 + 2j, 0.5, -1.083560325577726 - 2.078816545686119j),
    (-0.4 - 5j, 3.0, 358.92523964731373 + 682.9709845725852j),
]
LOG_GAMMA_REFERENCE = [
    (0.5, 0.5723649429247001),
    (3 + 4j, -1.7566267846037842 + 4.742664438034658j),
    (-2.5 + 0.1j, -0.10314924404281921 - 9.314444268359837j),
    (100 + 1j, 359.129180370832 + 4.600178686394668j),
    (0.1 - 30j, -47.56542355569917 - 71.40632506346213j),
]


@pytest.mark.parametrize("z, x, expected", K_REFERENCE)
def test_besselk_matches_reference(z, x, expected):
    assert abs(besselk(z, x) - expected) <= 1e-12 * abs(expected)


@pytest.mark.parametrize("nu, x, expected", I_REFERENCE)
def test_besseli_matches_reference(nu, x, expected):
    assert abs(besseli(nu, x) - expected) <= 1e-12 * abs(expected)


@pytest.mark.parametrize("w, expected", LOG_GAMMA_REFERENCE)
def test_log_gamma_matches_reference(w, expected):
    assert abs(log_gamma(w) - expected) <= 1e-12 * max(1.0, abs(expected))


def test_gamma_small_integers_and_half():
    np.testing.assert_allclose(gamma(np.array([1.0, 2.0, 5.0])).real, [1.0, 1.0, 24.0], rtol=1e-14)
    assert abs(gamma(0.5) - np.sqrt(np.pi)) < 1e-14


def test_gamma_agrees_with_scipy_on_a_grid():
    re, im = np.meshgrid(np.linspace(-4.7, 8.3, 14), np.linspace(-20, 20, 9))
    w = re + 1j * im
    np.testing.assert_allclose(gamma(w), special.gamma(w), rtol=1e-12)
    np.testing.assert_allclose(log_gamma(w), special.loggamma(w), rtol=1e-12, atol=1e-12)


def test_gamma_pole_raises():
    with pytest.raises(PoleProximity):
        gamma(-2.0)
    assert rgamma(-2.0) == 0


def test_half_order_closed_form():
    x = np.geomspace(0.01, 25, 20)
    closed = np.sqrt(np.pi / (4 * np.sqrt(x))) * np.exp(-2 * np.sqrt(x))
    np.testing.assert_allclose(besselk(0.5, x).real, closed, rtol=1e-12)


def test_besselk_real_order_agrees_with_scipy():
    x = np.geomspace(0.01, 50, 12)
    for nu in (0.0, 1.0, 2.75):
        np.testing.assert_allclose(besselk(nu, x).real, special.kv(nu, 2 * np.sqrt(x)), rtol=1e-12)


def test_kl_kernel_definition():
    z, x = 0.7 + 1.3j, 2.2
    assert abs(kl_kernel(z, x) - 2 * x ** (z / 2) * besselk(z, x)) < 1e-14


def test_ikernel_negative_integer_order():
    x = 0.8
    assert abs(ikernel(-2, x) - x ** -2 * ikernel(2, x)) < 1e-14


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-15, 15), st.floats(0.05, 20))
def test_besselk_order_symmetry(re, im, x):
    z = complex(re, im)
    a, b = besselk(z, x), besselk(-z, x)
    assert abs(a - b) <= 1e-11 * max(abs(a), 1e-300)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-15, 15), st.floats(0.05, 20))
def test_besselk_recurrence(re, im, x):
    # K_{z+1}(w) - K_{z-1}(w) = (2z/w) K_z(w), w = 2 sqrt x
    z = complex(re, im)
    w = 2 * np.sqrt(x)
    lhs = besselk(z + 1, x) - besselk(z - 1, x)
    rhs = 2 * z / w * besselk(z, x)
    scale = abs(besselk(z + 1, x)) + abs(besselk(z - 1, x))
    assert abs(lhs - rhs) <= 1e-11 * scale


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-10, 10))
def test_gamma_recurrence(re, im):
    w = complex(re, im)
    if min(abs(w - k) for k in range(-7, 1)) < 1e-3:
        return
    assert abs(gamma(w + 1) - w * gamma(w)) <= 1e-12 * abs(gamma(w + 1)) + 1e-300
