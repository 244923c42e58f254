import numpy as np
import pytest
from scipy import integrate

from kltransform.convolution import KernelSpec, convolve
from kltransform.errors import DomainViolation, KernelZeroOnContour, ValidationError
from kltransform.functions import exp_function
from kltransform.mellin import Decay, RealFunction
from kltransform.solver import SolveConfig, solve, synthesize_rhs

EXP = exp_function()
HALF = KernelSpec.half_inverse_sqrt()
POWER = KernelSpec.power(1.0)
# mpmath at 30 digits, frozen: g(1) = integral of k_h(1, y) e^{-y} dy
G_AT_ONE = {"half": 0.192463946088509056946817601771, "power": 0.113893872749533435652719574932}
T_GRID = np.geomspace(0.2, 5.0, 6)


@pytest.fixture(scope="module")
def half_rhs():
    return synthesize_rhs(EXP, HALF, analytic=True)


def test_config_validation():
    with pytest.raises(DomainViolation):
        SolveConfig(HALF, -0.3, 0.1)
    with pytest.raises(DomainViolation):
        SolveConfig(HALF, -0.6, -0.49)
    with pytest.raises(DomainViolation):
        SolveConfig(HALF, -0.55, -0.7)
    with pytest.raises(ValidationError):
        SolveConfig(HALF, -0.3, -0.49, zero_guard=0.0)


@pytest.mark.parametrize("kernel, key", [(HALF, "half"), (POWER, "power")])
def test_synthesized_rhs_reference(kernel, key):
    analytic = synthesize_rhs(EXP, kernel, analytic=True)
    grid = synthesize_rhs(EXP, kernel, x_grid=np.array([0.5, 1.0, 2.0, 4.0]))
    assert abs(analytic(np.array([1.0]))[0] - G_AT_ONE[key]) < 1e-12
    assert abs(grid.values[1] - G_AT_ONE[key]) < 1e-11


def test_synthesized_rhs_brute_force_half_kernel():
    def integrand(y):
        r = np.sqrt(1.0 + y)
        return np.pi / r * np.exp(-2 * r) * np.exp(-y)

    ref, _ = integrate.quad(integrand, 0, np.inf, epsabs=1e-14, epsrel=1e-13)
    assert abs(synthesize_rhs(EXP, HALF, analytic=True)(np.array([1.0]))[0] - ref) < 1e-12


@pytest.mark.parametrize("kernel", [HALF, POWER, KernelSpec.power(1.5)])
def test_synthesized_rhs_equals_convolution(kernel):
    x = np.array([0.3, 1.0, 2.5])
    g = synthesize_rhs(EXP, kernel, analytic=True)(x)
    np.testing.assert_allclose(g, convolve(EXP, kernel.h, x), rtol=1e-6)


def test_analytic_synthesis_needs_exponential_decay():
    slow = RealFunction(lambda x: 1.0 / (1.0 + np.asarray(x)) ** 3, 0.0, Decay(0.0, 1.0, -3.0))
    with pytest.raises(ValidationError):
        synthesize_rhs(slow, HALF, analytic=True)


def test_zero_rhs_gives_zero_solution():
    zero = RealFunction(lambda x: np.zeros(np.shape(x), dtype=complex), 0.5, Decay(1.0), sector=np.pi)
    out = solve(zero, SolveConfig(HALF, -0.3, -0.49), T_GRID)
    np.testing.assert_array_equal(out.values, 0.0)


def test_zero_guard(half_rhs):
    # |Gamma(z + 1/2)| e^{pi |tau| / 2} stays near sqrt(2 pi) |tau|^{gamma}: a guard of 10 trips it
    with pytest.raises(KernelZeroOnContour):
        solve(half_rhs, SolveConfig(HALF, -0.3, -0.49, zero_guard=10.0), T_GRID)


def test_solve_rejects_bad_grid(half_rhs):
    with pytest.raises(ValidationError):
        solve(half_rhs, SolveConfig(HALF, -0.3, -0.49), [1.0, -2.0])


@pytest.mark.slow
def test_manufactured_half_kernel(half_rhs):
    out, info = solve(half_rhs, SolveConfig(HALF, -0.3, -0.49, tol=1e-6), T_GRID, full_output=True)
    assert info["converged"]
    np.testing.assert_allclose(out.values, np.exp(-T_GRID), rtol=1e-4)
    assert np.all(np.abs(out.values - np.exp(-T_GRID)) <= np.maximum(out.err, 1e-9))


@pytest.mark.slow
def test_linearity(half_rhs):
    g2 = synthesize_rhs(exp_function(2.0), HALF, analytic=True)
    combo = RealFunction(lambda x: 2.0 * half_rhs(x) - 0.5 * g2(x), half_rhs.origin_exponent,
                         half_rhs.decay, sector=np.pi)
    config = SolveConfig(HALF, -0.3, -0.49, tol=1e-5)
    ts = np.array([0.3, 1.0, 3.0])
    _, a = solve(half_rhs, config, ts, full_output=True)
    _, b = solve(g2, config, ts, full_output=True)
    _, c = solve(combo, config, ts, full_output=True)
    np.testing.assert_allclose(c["values"], 2.0 * a["values"] - 0.5 * b["values"],
                               atol=3 * (c["err"] + 2 * a["err"] + b["err"]).max() + 1e-7)
