"""Acceptance criteria C1-C13, each at its stated tolerance and time budget.

Every test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""
import math
import time

import numpy as np
from scipy import special

from kltransform.convolution import (KernelSpec, factorization_check, kernel_kh_quadrature,
                                     kernel_product_sides, parseval_sides, young_norms)
from kltransform.functions import EXP_IMAGE_ENVELOPE, bump, exp_cosine, exp_function, exp_line, monomial
from kltransform.quad import ContourSpec, integrate_halfline
from kltransform.solver import SolveConfig, solve, synthesize_rhs
from kltransform.specfun import besselk
from kltransform.transform import (TransformImage, derivative_shift_check, forward,
                                   forward_laplace_route, forward_mellin_route, forward_tail,
                                   index_integral_bessel, index_integral_exp, invert,
                                   invert_expansion)

EXP = exp_function()
EXP_AT_ONE = 1.0 - math.e * special.exp1(1.0)


def rel(value, reference):
    return abs(value - reference) / abs(reference)


def test_c01_mellin_identity(acceptance):
    start = time.perf_counter()
    worst = 0.0
    for s in (0.6, 0.9, 0.6 + 0.5j, 0.9 + 1.0j):
        for z in (0.5, 1.0, 0.3 + 0.7j, 1.0 + 0.8j):
            value = forward(monomial(s - 1.0), z, 1e-11)
            worst = max(worst, rel(value, special.gamma(s + z) * special.gamma(s)))
    elapsed = time.perf_counter() - start
    assert acceptance("C1 Mellin identity", worst <= 1e-8 and elapsed < 10,
                      f"max rel err {worst:.2e} (<= 1e-8) on 4x4 (s, z), {elapsed:.1f} s (< 10 s)")


def test_c02_half_order_closed_form(acceptance):
    start = time.perf_counter()
    x = np.geomspace(0.01, 25, 20)
    closed = np.sqrt(np.pi / (4 * np.sqrt(x))) * np.exp(-2 * np.sqrt(x))
    worst = float(np.max(np.abs(besselk(0.5, x) - closed) / closed))
    elapsed = time.perf_counter() - start
    assert acceptance("C2 half-order kernel", worst <= 1e-10 and elapsed < 1,
                      f"max rel err {worst:.2e} (<= 1e-10) at 20 points, {elapsed:.2f} s (< 1 s)")


def test_c03_kernel_product(acceptance):
    start = time.perf_counter()
    worst = 0.0
    for x in (0.5, 1.0, 2.0):
        for y in (0.5, 1.0, 3.0):
            for z in (0.0, 0.5, 0.3 + 0.7j):
                left, right = kernel_product_sides(x, y, z)
                worst = max(worst, rel(right.value, left))
    left, right = kernel_product_sides(1.0, 1.0, 0.5)
    exact = 0.5 * math.pi * math.exp(-4)
    anchor = max(rel(left, exact), rel(right.value, exact))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-7 and anchor <= 1e-7 and elapsed < 30
    assert acceptance("C3 kernel product", ok,
                      f"max residual {worst:.2e} (<= 1e-7) on 3x3x3 grid; x=y=1, z=1/2 both sides "
                      f"{complex(left).real:.10f} vs (pi/2)e^-4 = {exact:.10f}; {elapsed:.1f} s (< 30 s)")


def test_c04_index_integral_exp(acceptance):
    start = time.perf_counter()
    worst = max(rel(index_integral_exp(x, 0.25).value, math.exp(-2 * math.sqrt(x))) for x in (0.1, 1.0, 10.0))
    elapsed = time.perf_counter() - start
    assert acceptance("C4 index integral e^(-2 sqrt x)", worst <= 1e-6 and elapsed < 10,
                      f"max rel err {worst:.2e} (<= 1e-6), {elapsed:.1f} s (< 10 s)")


def test_c05_index_integral_bessel(acceptance):
    start = time.perf_counter()
    mu = 0.5
    norm = special.gamma(1 + mu / 2) * special.gamma(1 - mu / 2)
    worst = max(rel(index_integral_bessel(x, mu, 0.375).value, special.kv(mu, 2 * math.sqrt(x)) / norm)
                for x in (0.5, 2.0))
    elapsed = time.perf_counter() - start
    assert acceptance("C5 index integral K_mu", worst <= 1e-6 and elapsed < 10,
                      f"max rel err {worst:.2e} (<= 1e-6), {elapsed:.1f} s (< 10 s)")


def test_c06_inversion_round_trip(acceptance):
    start = time.perf_counter()
    image = TransformImage.from_function(EXP, EXP_IMAGE_ENVELOPE)
    ts = np.geomspace(0.1, 5.0, 10)
    spec = ContourSpec(gamma=-0.6, tol=1e-8, rtol=1e-8)
    values = invert(image, ts, spec).real
    expansion = invert_expansion(image, ts, spec).real
    round_trip = float(np.max(np.abs(values / np.exp(-ts) - 1)))
    agreement = float(np.max(np.abs(expansion / values - 1)))
    elapsed = time.perf_counter() - start
    ok = round_trip <= 1e-6 and agreement <= 1e-6 and elapsed < 60
    assert acceptance("C6 inversion round trip", ok,
                      f"max rel err {round_trip:.2e} (<= 1e-6) at 10 t; expansion route gap "
                      f"{agreement:.2e} (<= 1e-6); {elapsed:.1f} s (< 60 s)")


def test_c07_route_consistency(acceptance):
    start = time.perf_counter()
    worst = 0.0
    for z in (0.5, 1.0, 2.5, 0.3 + 2.0j, 1.0 - 1.0j):
        direct = forward(EXP, z, 1e-11)
        mellin = forward_mellin_route(exp_line(), z, 1e-11)
        laplace = forward_laplace_route(EXP, z, 1e-11)
        worst = max(worst, rel(mellin, direct), rel(laplace, direct), rel(laplace, mellin))
    elapsed = time.perf_counter() - start
    assert acceptance("C7 route consistency", worst <= 1e-7 and elapsed < 20,
                      f"max pairwise rel gap {worst:.2e} (<= 1e-7) at 5 z, {elapsed:.1f} s (< 20 s)")


def test_c08_factorization(acceptance):
    start = time.perf_counter()
    residuals = []
    right_at_one = None
    for z in (1.0, 1.5, 1.0 + 0.5j):
        res, _, right = factorization_check(EXP, EXP, z, full_output=True)
        residuals.append(res)
        if z == 1.0:
            right_at_one = right
    anchor = rel(right_at_one, EXP_AT_ONE ** 2)
    elapsed = time.perf_counter() - start
    ok = max(residuals) <= 1e-6 and anchor <= 1e-9 and elapsed < 120
    assert acceptance("C8 factorization", ok,
                      f"residuals {', '.join(f'{r:.1e}' for r in residuals)} (<= 1e-6); right side at z=1 "
                      f"{right_at_one.real:.9f} vs (1 - e E1(1))^2 = {EXP_AT_ONE ** 2:.9f}; "
                      f"{elapsed:.1f} s (< 120 s)")


def test_c09_young_inequality(acceptance):
    pairs = [(EXP, EXP), (EXP, bump()), (exp_cosine(), EXP)]
    lines = []
    ok = True
    for alpha in (0.5, 1.0):
        for f, g in pairs:
            lhs, rhs, err = young_norms(f, g, alpha)
            # nonnegative pairs give equality, so allow the certified quadrature error
            ok &= lhs <= rhs + err
            lines.append(f"{f.name}*{g.name} a={alpha:g}: {lhs:.6g} <= {rhs:.6g}")
    assert acceptance("C9 Young inequality", ok, "; ".join(lines))


def test_c10_parseval(acceptance):
    start = time.perf_counter()
    k0_square = integrate_halfline(lambda x: special.k0(2 * np.sqrt(x)) ** 2, 1e-12, 1e-12,
                                   origin_exponent=-0.05).value.real
    lhs, rhs = parseval_sides(EXP, EXP, 0.5)
    residual = rel(lhs.value, rhs.value)
    elapsed = time.perf_counter() - start
    ok = residual <= 1e-5 and abs(k0_square - 0.25) <= 1e-8 and elapsed < 120
    assert acceptance("C10 Parseval", ok,
                      f"residual {residual:.2e} (<= 1e-5); int K0^2 = {k0_square:.12f} (1/4 +- 1e-8); "
                      f"{elapsed:.1f} s (< 120 s)")


def test_c11_closed_form_kernels(acceptance):
    kh_worst = 0.0
    image_worst = 0.0
    probes = (0.5, 1.0 + 0.5j, 2.0, 0.2 + 3.0j)
    for spec in (KernelSpec.half_inverse_sqrt(), KernelSpec.power(1.0), KernelSpec.power(1.5)):
        for x in (0.5, 1.0, 2.0):
            for y in (0.5, 1.0, 3.0):
                kh_worst = max(kh_worst, rel(kernel_kh_quadrature(spec, x, y, 1e-11), float(spec.kh_closed(x, y))))
        for z in probes:
            if spec.closed_form == "half_inverse_sqrt":
                closed = math.sqrt(math.pi) * special.gamma(z + 0.5)
            else:
                closed = special.gamma(spec.beta) * special.gamma(spec.beta + z)
            image_worst = max(image_worst, rel(forward(spec.h, z, 1e-11), closed))
    ok = kh_worst <= 1e-8 and image_worst <= 1e-7
    assert acceptance("C11 closed-form kernels", ok,
                      f"k_h quadrature vs closed max rel {kh_worst:.2e} (<= 1e-8) on 3 kernels x 3x3; "
                      f"Fh vs gamma products max rel {image_worst:.2e} (<= 1e-7)")


def test_c12_solver_manufactured(acceptance):
    start = time.perf_counter()
    ts = np.geomspace(0.2, 5.0, 6)
    parts = []
    ok = True
    for kernel, gammas, alpha in ((KernelSpec.half_inverse_sqrt(), (-0.3, -0.4), -0.49),
                                  (KernelSpec.power(1.0), (-0.6, -0.4), -0.95)):
        g = synthesize_rhs(EXP, kernel, analytic=True)
        solutions = []
        for gm in gammas:
            _, info = solve(g, SolveConfig(kernel, gm, alpha, tol=1e-6), ts, full_output=True)
            solutions.append(info["values"])
            err = float(np.max(np.abs(info["values"] / np.exp(-ts) - 1)))
            ok &= err <= 1e-4
            parts.append(f"{kernel.closed_form} gamma={gm}: {err:.1e}")
        gap = float(np.max(np.abs(solutions[0] / solutions[1] - 1)))
        ok &= gap <= 1e-5
        parts.append(f"{kernel.closed_form} contour gap {gap:.1e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    assert acceptance("C12 solver manufactured solutions", ok,
                      f"{'; '.join(parts)} (recovery <= 1e-4, gap <= 1e-5); {elapsed:.0f} s (< 300 s)")


def test_c13_operational_identities(acceptance):
    shifts = [derivative_shift_check(exp_line(n, 0.5 - n), n, 1.0) for n in (1, 2)]
    tails = [forward_tail(EXP, 1.0, 1.0 + 0.3j, n).info["residual"] for n in (1, 2)]
    ok = max(shifts) <= 1e-6 and max(tails) <= 1e-6
    assert acceptance("C13 operational identities", ok,
                      f"derivative shift n=1,2: {shifts[0]:.1e}, {shifts[1]:.1e}; forward tail n=1,2: "
                      f"{tails[0]:.1e}, {tails[1]:.1e} (<= 1e-6)")
