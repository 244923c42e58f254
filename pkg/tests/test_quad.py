import math

import numpy as np
import pytest
from scipy import special

from kltransform.errors import EnvelopeViolation, NonConvergence, PoleOnContour
from kltransform.quad import (ContourSpec, Envelope, integrate_contour, integrate_finite,
                              integrate_halfline, integrate_quarterplane, taper_window)
from kltransform.specfun import gamma


def test_finite_polynomial_exact():
    res = integrate_finite(lambda x: x ** 5 - 3 * x, 0.0, 2.0)
    assert abs(res.value - (64 / 6 - 6)) < 1e-13
    assert res.converged


def test_finite_vector_valued():
    res = integrate_finite(lambda x: np.stack([np.sin(x), np.cos(x)], axis=-1), 0.0, np.pi)
    np.testing.assert_allclose(np.real(res.value), [2.0, 0.0], atol=1e-12)


def test_halfline_exponential():
    res = integrate_halfline(lambda x: np.exp(-x))
    assert abs(res.value - 1.0) < 1e-12


def test_halfline_origin_singularity():
    res = integrate_halfline(lambda x: np.exp(-x) / np.sqrt(x), origin_exponent=-0.5)
    assert abs(res.value - math.sqrt(math.pi)) < 1e-11


def test_halfline_power_tail():
    # integral of x^{-0.4} / (1 + x) = pi / sin(0.6 pi)
    res = integrate_halfline(lambda x: x ** -0.4 / (1 + x), origin_exponent=-0.4, tail_exponent=-1.4)
    assert abs(res.value - math.pi / math.sin(0.6 * math.pi)) < 1e-9


def test_halfline_k0_square():
    res = integrate_halfline(lambda x: special.k0(2 * np.sqrt(x)) ** 2, 1e-12, 1e-12, origin_exponent=-0.05)
    assert abs(res.value - 0.25) < 1e-10


def test_halfline_nonconvergence_is_reported():
    with pytest.raises(NonConvergence) as info:
        integrate_halfline(lambda x: np.sin(1 / x) / x ** 0.9, 1e-14, 1e-14, origin_exponent=-0.9,
                           max_depth=6)
    assert info.value.result is not None
    res = integrate_halfline(lambda x: np.sin(1 / x) / x ** 0.9, 1e-14, 1e-14, origin_exponent=-0.9,
                             max_depth=6, strict=False)
    assert not res.converged


def test_quarterplane_separable():
    res = integrate_quarterplane(lambda u, v: np.exp(-u - 2 * v))
    assert abs(res.value - 0.5) < 1e-10


def test_contour_gamma_inverse_mellin():
    # (1/2 pi i) * integral of Gamma(s) x^{-s} ds on Re s = 1/2 equals e^{-x}
    x = 1.0
    spec = ContourSpec(gamma=0.5, tol=1e-12, rtol=1e-12, poles=(0.0,))
    env = Envelope(3.0, 0.0, np.pi / 2)
    res = integrate_contour(lambda s: gamma(s) * x ** (-s), spec, env, symmetric=True)
    assert abs(res.value - math.exp(-x)) < 1e-11
    full = integrate_contour(lambda s: gamma(s) * x ** (-s), spec, env)
    assert abs(full.value - res.value) < 1e-11


def test_contour_fixed_step_is_deterministic():
    spec = ContourSpec(gamma=0.5, step=0.05, truncation=30.0, tol=1e-10)
    env = Envelope(3.0, 0.0, np.pi / 2)
    a = integrate_contour(lambda s: gamma(s) * 2.0 ** (-s), spec, env, symmetric=True)
    b = integrate_contour(lambda s: gamma(s) * 2.0 ** (-s), spec, env, symmetric=True)
    assert a.value == b.value
    assert abs(a.value - math.exp(-2.0)) < 1e-10


def test_contour_envelope_violation():
    spec = ContourSpec(gamma=0.5, tol=1e-8)
    with pytest.raises(EnvelopeViolation):
        integrate_contour(lambda s: np.exp(-0.1 * np.abs(s.imag)) + 0j, spec, Envelope(1.0, 0.0, 1.0))


def test_contour_through_pole_rejected():
    with pytest.raises(PoleOnContour):
        ContourSpec(gamma=0.0, poles=(0.0,))


def test_taper_window_limits():
    w = taper_window(np.array([0.0, 1.0, 2.0, 3.0, 4.0]), 1.0, 3.0)
    np.testing.assert_allclose(w, [1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-15)


def test_envelope_tail_bound():
    env = Envelope(2.0, -0.5, 1.0)
    T = 5.0
    exact = 2.0 * special.gammaincc(0.5, T) * special.gamma(0.5)
    assert abs(env.tail(T) - exact) < 1e-12
    assert env.height_for(1e-8) > T
