import math

import numpy as np
import pytest
from scipy import special

from kltransform.errors import (DomainViolation, EnvelopeTooWeak, IdentityResidualExceeded,
                                PoleOnContour)
from kltransform.functions import EXP_IMAGE_ENVELOPE, exp_function, exp_line, monomial
from kltransform.mellin import Decay, RealFunction
from kltransform.quad import ContourSpec
from kltransform.specfun import gamma
from kltransform.transform import (ImageEnvelope, TransformImage, derivative_shift_check,
                                   expansion_integral, forward, forward_laplace_route,
                                   forward_mellin_route, forward_tail, index_integral_bessel,
                                   index_integral_exp, invert, invert_expansion, laplace_identity)

EXP = exp_function()
EXP_AT_ONE = 1.0 - math.e * special.exp1(1.0)
# 2 * integral of x^{z/2} K_z(2 sqrt x) e^{-x} dx by mpmath quadrature, frozen
EXP_IMAGE_REFERENCE = [
    (1.0, 0.4036526376768059),
    (0.3 + 2j, 0.07810934103454337 - 0.020724917169294255j),
    (2.5, 0.8722738919851598),
]


@pytest.fixture(scope="module")
def exp_image():
    return TransformImage.from_function(EXP, EXP_IMAGE_ENVELOPE)


@pytest.mark.parametrize("z, expected", EXP_IMAGE_REFERENCE)
def test_forward_exp_reference(z, expected):
    assert abs(forward(EXP, z) - expected) < 1e-11 * abs(expected)


def test_forward_closed_form_at_one():
    assert abs(forward(EXP, 1.0) - EXP_AT_ONE) < 1e-12


def test_forward_monomial_gamma_product():
    value = forward(monomial(-0.25), 0.5)
    assert abs(value - special.gamma(1.25) * special.gamma(0.75)) < 1e-11


def test_forward_domain_violation():
    with pytest.raises(DomainViolation):
        forward(monomial(-0.5), -0.6)


@pytest.mark.parametrize("z", [0.5, 1.0, 0.3 + 2.0j, 2.0 - 1.0j])
def test_three_routes_agree(z):
    direct = forward(EXP, z)
    assert abs(forward_mellin_route(exp_line(), z) - direct) < 1e-9 * abs(direct)
    assert abs(forward_laplace_route(EXP, z) - direct) < 1e-9 * abs(direct)


def test_mellin_route_pole_on_contour():
    with pytest.raises(PoleOnContour):
        forward_mellin_route(exp_line(0, 1.0), 1.0)


def test_laplace_route_alpha_half_plane():
    with pytest.raises(DomainViolation):
        forward_laplace_route(EXP, -0.5 + 0j, alpha=1.0)


# mpmath quadrature at 50 digits on a subdivided range, frozen; the image decays like e^{-pi |tau| / 2}
HIGH_IMAGE_REFERENCE = [
    (-0.5 + 8.0j, 7.325018683968195e-07 + 8.319794782009939e-07j),
    (-0.5 + 20.0j, 2.232772125838383e-15 + 1.7755266158174424e-15j),
]


@pytest.mark.parametrize("z, expected", HIGH_IMAGE_REFERENCE)
def test_image_keeps_relative_accuracy_high_on_the_line(exp_image, z, expected):
    assert abs(exp_image(z) - expected) < 1e-9 * abs(expected)


@pytest.mark.parametrize("z, expected", HIGH_IMAGE_REFERENCE)
def test_direct_forward_error_estimate_is_honest(z, expected):
    res = forward(EXP, z, full_output=True)
    assert abs(res.value - expected) <= res.err_abs


def test_image_matches_direct_forward(exp_image):
    for z in (0.4, 1.0 + 5.0j):
        assert abs(exp_image(z) - forward(EXP, z)) < 1e-9 * abs(forward(EXP, z))


def test_image_is_analytic(exp_image):
    assert exp_image.check_analytic([0.5 + 1j, -0.3 + 4j]) < 1e-6


def test_invert_round_trip(exp_image):
    t = np.geomspace(0.1, 5, 6)
    for g in (-0.25, -0.6):
        values = invert(exp_image, t, ContourSpec(gamma=g, tol=1e-9, rtol=1e-9))
        np.testing.assert_allclose(values.real, np.exp(-t), rtol=1e-7)


def test_invert_rejects_weak_envelope():
    # sqrt(pi) Gamma(z + 1/2) decays like |tau|^gamma e^{-pi |tau|/2}: the
    # inversion integrand does not decay on Re z = -1/4
    image = TransformImage.closed_form(lambda z: math.sqrt(math.pi) * gamma(z + 0.5), -0.5,
                                       ImageEnvelope(None, 0.0))
    with pytest.raises(EnvelopeTooWeak):
        invert(image, 1.0, ContourSpec(gamma=-0.25))


def test_invert_strict_requires_absolute_convergence(exp_image):
    with pytest.raises(EnvelopeTooWeak):
        invert(exp_image, 1.0, ContourSpec(gamma=-0.25), strict=True)
    value = invert(exp_image, 1.0, ContourSpec(gamma=-0.6, tol=1e-9, rtol=1e-9), strict=True)
    assert abs(value - math.exp(-1.0)) < 1e-8


def test_invert_contour_outside_strip(exp_image):
    with pytest.raises(DomainViolation):
        invert(exp_image, 1.0, ContourSpec(gamma=0.2))


def test_expansion_route_matches_finite_difference(exp_image):
    spec = ContourSpec(gamma=-0.6, tol=1e-10, rtol=1e-10)
    x, h = 1.3, 1e-3
    fd = (expansion_integral(exp_image, x + h, spec) - expansion_integral(exp_image, x - h, spec)) / (2 * h)
    direct = invert_expansion(exp_image, x, spec)
    assert abs(direct - math.exp(-x)) < 1e-8
    assert abs(fd - direct) < 1e-6


def test_expansion_parameter_check(exp_image):
    with pytest.raises(DomainViolation):
        invert_expansion(exp_image, 1.0, ContourSpec(gamma=-0.6), c0=0.2, epsilon=0.5)


def test_laplace_identity(exp_image):
    x = 0.7
    assert abs(laplace_identity(exp_image, x, -0.5) - 1.0 / (1.0 + x)) < 1e-9


@pytest.mark.parametrize("n", [0, 1, 2])
def test_forward_tail_identity(n):
    res = forward_tail(EXP, 1.0, 1.0 + 0.3j, n)
    assert res.info["residual"] < 1e-9


def test_forward_tail_detects_wrong_derivative():
    wrong = RealFunction(EXP.func, 0.0, Decay(1.0), derivatives=(lambda x: np.exp(-np.asarray(x)),))
    with pytest.raises(IdentityResidualExceeded):
        forward_tail(wrong, 1.0, 1.0, 1)


@pytest.mark.parametrize("n", [1, 2])
def test_derivative_shift(n):
    assert derivative_shift_check(exp_line(n, 0.5 - n), n, 1.0) < 1e-9


def test_derivative_shift_domain():
    with pytest.raises(DomainViolation):
        derivative_shift_check(exp_line(0, 0.5), 1, 1.0)


@pytest.mark.parametrize("x", [0.1, 1.0, 10.0])
def test_index_integral_exp(x):
    res = index_integral_exp(x, 0.25)
    assert abs(res.value - math.exp(-2 * math.sqrt(x))) < 1e-10


@pytest.mark.parametrize("x", [0.5, 2.0])
def test_index_integral_bessel(x):
    res = index_integral_bessel(x, 0.5, 0.375)
    expected = special.kv(0.5, 2 * math.sqrt(x)) / (special.gamma(1.25) * special.gamma(0.75))
    assert abs(res.value - expected) < 1e-10


def test_index_integral_strip():
    with pytest.raises(DomainViolation):
        index_integral_exp(1.0, 0.6)
