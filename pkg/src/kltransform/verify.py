"""Identity suites: each check computes a residual against a closed form or a
second, independent route and reports it with its threshold."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List

import numpy as np
from scipy import special

from .convolution import (KernelSpec, factorization_check, kernel_kh_quadrature, kernel_product_sides,
                          parseval_sides, young_norms)
from .functions import EXP_IMAGE_ENVELOPE, bump, exp_cosine, exp_function, exp_line, monomial
from .quad import ContourSpec, integrate_halfline
from .solver import SolveConfig, solve, synthesize_rhs
from .specfun import besselk
from .transform import (TransformImage, derivative_shift_check, forward, forward_laplace_route,
                        forward_mellin_route, forward_tail, index_integral_bessel,
                        index_integral_exp, invert, invert_expansion)

__all__ = ["CheckRow", "SUITES", "run_suite"]

EXP_AT_ONE = 1.0 - math.e * special.exp1(1.0)


@dataclass
class CheckRow:
    check: str
    value: complex
    reference: complex
    residual: float
    threshold: float
    err_abs: float = 0.0
    evals: int = 0
    converged: bool = True

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.threshold)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _rel(value, reference) -> float:
    return abs(value - reference) / abs(reference)


def index_integrals() -> List[CheckRow]:
    rows = []
    for x in (0.1, 1.0, 10.0):
        res = index_integral_exp(x, 0.25)
        ref = math.exp(-2 * math.sqrt(x))
        rows.append(CheckRow(f"index_exp x={x:g}", res.value, ref, _rel(res.value, ref), 1e-6,
                             float(res.err_abs), res.evals, res.converged))
    norm = math.gamma(1.25) * math.gamma(0.75)
    for x in (0.5, 2.0):
        res = index_integral_bessel(x, 0.5, 0.375)
        ref = special.kv(0.5, 2 * math.sqrt(x)) / norm
        rows.append(CheckRow(f"index_bessel x={x:g}", res.value, ref, _rel(res.value, ref), 1e-6,
                             float(res.err_abs), res.evals, res.converged))
    return rows


def kernels() -> List[CheckRow]:
    rows = []
    for x in np.geomspace(0.01, 25, 5):
        val = besselk(0.5, x)
        ref = math.sqrt(math.pi / (4 * math.sqrt(x))) * math.exp(-2 * math.sqrt(x))
        rows.append(CheckRow(f"K_1/2 x={x:.4g}", val, ref, _rel(val, ref), 1e-10))
    left, right = kernel_product_sides(1.0, 1.0, 0.5)
    ref = 0.5 * math.pi * math.exp(-4)
    rows.append(CheckRow("kernel product x=y=1 z=1/2", right.value, ref, _rel(right.value, ref), 1e-7,
                         float(right.err_abs), right.evals, right.converged))
    for spec in (KernelSpec.half_inverse_sqrt(), KernelSpec.power(1.0), KernelSpec.power(1.5)):
        for x in (0.5, 1.0, 2.0):
            for y in (0.5, 1.0, 3.0):
                val = kernel_kh_quadrature(spec, x, y, 1e-11)
                ref = float(spec.kh_closed(x, y))
                rows.append(CheckRow(f"k_h {spec.h.name} x={x:g} y={y:g}", val, ref, _rel(val, ref), 1e-8))
        gap = spec.verify_image()
        rows.append(CheckRow(f"Fh {spec.h.name}", gap, 0.0, gap, 1e-7))
    return rows


def mellin_identity() -> List[CheckRow]:
    rows = []
    for s in (0.6, 0.9, 0.6 + 0.5j, 0.9 + 1.0j):
        for z in (0.5, 1.0, 0.3 + 0.7j, 1.0 + 0.8j):
            val = forward(monomial(s - 1.0), z, 1e-11)
            ref = special.gamma(s + z) * special.gamma(s)
            rows.append(CheckRow(f"mellin s={s} z={z}", val, ref, _rel(val, ref), 1e-8))
    return rows


def routes() -> List[CheckRow]:
    f = exp_function()
    line = exp_line()
    rows = []
    for z in (0.5, 1.0, 0.3 + 2.0j):
        direct = forward(f, z, 1e-11)
        via_mellin = forward_mellin_route(line, z, 1e-11)
        via_laplace = forward_laplace_route(f, z, 1e-11)
        rows.append(CheckRow(f"direct vs mellin z={z}", via_mellin, direct, _rel(via_mellin, direct), 1e-7))
        rows.append(CheckRow(f"direct vs laplace z={z}", via_laplace, direct, _rel(via_laplace, direct), 1e-7))
    val = forward(f, 1.0)
    rows.append(CheckRow("F[exp](1) closed form", val, EXP_AT_ONE, _rel(val, EXP_AT_ONE), 1e-10))
    return rows


def inversion() -> List[CheckRow]:
    f = exp_function()
    image = TransformImage.from_function(f, EXP_IMAGE_ENVELOPE)
    ts = np.geomspace(0.1, 5.0, 5)
    spec = ContourSpec(gamma=-0.6, tol=1e-8, rtol=1e-8)
    res = invert(image, ts, spec, full_output=True)
    expansion = invert_expansion(image, ts, spec)
    rows = []
    for t, v, e, w in zip(ts, res.value, res.err_abs, expansion):
        rows.append(CheckRow(f"invert t={t:.3g}", v, math.exp(-t), _rel(v, math.exp(-t)), 1e-6,
                             float(e), res.evals, res.converged))
        rows.append(CheckRow(f"expansion t={t:.3g}", w, v, _rel(w, v), 1e-6))
    return rows


def operational() -> List[CheckRow]:
    f = exp_function()
    rows = []
    for n in (1, 2):
        res = forward_tail(f, 1.0, 1.0 + 0.3j, n)
        rows.append(CheckRow(f"forward_tail n={n}", res.value, res.info["boundary_form"],
                             res.info["residual"], 1e-6, float(res.err_abs), res.evals, res.converged))
        line = exp_line(n, 0.5 - n)
        gap = derivative_shift_check(line, n, 1.0)
        rows.append(CheckRow(f"derivative_shift n={n}", gap, 0.0, gap, 1e-6))
    return rows


def convolution() -> List[CheckRow]:
    f = exp_function()
    res, left, right = factorization_check(f, f, 1.0, full_output=True)
    rows = [CheckRow("factorization z=1", left, right, res, 1e-6),
            CheckRow("F[exp](1)^2", right, EXP_AT_ONE ** 2, _rel(right, EXP_AT_ONE ** 2), 1e-9)]
    k0sq = integrate_halfline(lambda x: special.k0(2 * np.sqrt(x)) ** 2, 1e-12, 1e-12,
                              origin_exponent=-0.05).value.real
    rows.append(CheckRow("int K0(2 sqrt x)^2 dx", k0sq, 0.25, abs(k0sq - 0.25), 1e-8))
    lhs, rhs = parseval_sides(f, f, 0.5)
    rows.append(CheckRow("Parseval alpha=1/2", lhs.value, rhs.value, _rel(lhs.value, rhs.value), 1e-5,
                         float(lhs.err_abs + rhs.err_abs), lhs.evals + rhs.evals))
    for alpha in (0.5, 1.0):
        for g in (f, bump(), exp_cosine()):
            lhs, rhs, err = young_norms(f, g, alpha)
            rows.append(CheckRow(f"Young exp*{g.name} alpha={alpha:g}", lhs, rhs,
                                 max(lhs - rhs - err, 0.0), 0.0, err))
    return rows


def solver() -> List[CheckRow]:
    f = exp_function()
    ts = np.geomspace(0.2, 5.0, 6)
    rows = []
    for kernel, gammas, alpha in ((KernelSpec.half_inverse_sqrt(), (-0.3, -0.4), -0.49),
                                  (KernelSpec.power(1.0), (-0.6, -0.4), -0.95)):
        g = synthesize_rhs(f, kernel, analytic=True)
        sols = []
        for gm in gammas:
            _, info = solve(g, SolveConfig(kernel, gm, alpha, tol=1e-6), ts, full_output=True)
            sols.append(info["values"])
            resid = float(np.max(np.abs(info["values"] / np.exp(-ts) - 1)))
            rows.append(CheckRow(f"solve {kernel.h.name} gamma={gm}", info["values"][0], math.exp(-ts[0]),
                                 resid, 1e-4, float(np.max(info["err"])), 0, info["converged"]))
        gap = float(np.max(np.abs(sols[0] / sols[1] - 1)))
        rows.append(CheckRow(f"contour independence {kernel.h.name}", gap, 0.0, gap, 1e-5))
    return rows


SUITES: Dict[str, Callable[[], List[CheckRow]]] = {
    "index-integrals": index_integrals,
    "kernels": kernels,
    "mellin": mellin_identity,
    "routes": routes,
    "inversion": inversion,
    "operational": operational,
    "convolution": convolution,
    "solver": solver,
}


def run_suite(name: str) -> List[CheckRow]:
    if name == "all":
        return [row for suite in SUITES.values() for row in suite()]
    if name not in SUITES:
        from .errors import ValidationError
        raise ValidationError(f"unknown suite {name!r}; known: all, {', '.join(SUITES)}")
    return SUITES[name]()
