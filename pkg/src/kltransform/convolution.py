"""Convolution for the index transform and its kernel algebra.

(f * g)(x) = 2 * double integral of K_0(2 sqrt((x+u)(x+v)/x)) f(u) g(v) du dv,
whose Mellin transform factorizes as (Ff)(z) (Fg)(z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import k0

from .errors import ClosedFormMismatch, DomainViolation, ValidationError
from .mellin import Decay, RealFunction, mellin_forward
from .quad import (ContourSpec, Envelope, QuadResult, integrate_contour, integrate_halfline,
                   integrate_quarterplane)
from .specfun import besselk, kl_kernel, log_gamma
from .transform import TransformImage, forward

__all__ = [
    "KernelSpec",
    "convolve",
    "convolution_function",
    "kernel_product_check",
    "kernel_product_sides",
    "kernel_kh",
    "kernel_kh_quadrature",
    "factorization_check",
    "young_norms",
    "weighted_norm",
    "parseval_check",
    "parseval_sides",
]

# |f * g| behaves like x log(1/x) near 0 and like exp(-2 sqrt x) at infinity
CONV_ORIGIN_EXPONENT = 0.9
CONV_DECAY = Decay(rate=2.0, order=0.5)


def _k0_arg(x, u, v):
    return 2.0 * np.sqrt((x + u) * (x + v) / x)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel h of the first-kind equation together with its image (Fh)(z).

    Use the :meth:`half_inverse_sqrt` and :meth:`power` factories for the
    kernels with known closed forms.
    """

    h: RealFunction
    closed_form: str = "generic"
    beta: Optional[float] = None
    Fh: Optional[Callable] = None
    log_Fh: Optional[Callable] = None
    lower_bound: float = field(default=-1.0)

    @classmethod
    def half_inverse_sqrt(cls) -> "KernelSpec":
        h = RealFunction(lambda x: np.asarray(x) ** -0.5, -0.5, Decay(0.0, 1.0, -0.5),
                         sector=np.pi, name="x^-1/2")

        def log_fh(z):
            return 0.5 * math.log(math.pi) + log_gamma(np.asarray(z, dtype=complex) + 0.5)

        return cls(h, "half_inverse_sqrt", None, lambda z: np.exp(log_fh(z)), log_fh, -0.5)

    @classmethod
    def power(cls, beta: float) -> "KernelSpec":
        if beta <= 0:
            raise ValidationError("power kernel needs beta > 0")
        h = RealFunction(lambda x: np.asarray(x) ** (beta - 1.0), beta - 1.0,
                         Decay(0.0, 1.0, beta - 1.0), sector=np.pi, name=f"x^{beta - 1:g}")
        lg_beta = complex(log_gamma(complex(beta)))

        def log_fh(z):
            return lg_beta + log_gamma(np.asarray(z, dtype=complex) + beta)

        return cls(h, "power", float(beta), lambda z: np.exp(log_fh(z)), log_fh, -beta)

    @classmethod
    def generic(cls, h: RealFunction) -> "KernelSpec":
        return cls(h, "generic", None, None, None, -1.0 - h.origin_exponent)

    def image(self, z, tol: float = 1e-10):
        """(Fh)(z), from the closed form when present, else by quadrature."""
        if self.Fh is not None:
            return self.Fh(z)
        z = np.asarray(z, dtype=complex)
        return np.vectorize(lambda zz: forward(self.h, zz, tol), otypes=[complex])(z)

    def verify_image(self, probes=(0.5, 1.0 + 0.5j, 2.0), tol: float = 1e-7) -> float:
        """Largest relative gap between the closed-form image and forward(h, z)."""
        if self.Fh is None:
            return 0.0
        gaps = []
        for z in probes:
            ref = forward(self.h, z, 1e-11)
            gaps.append(abs(complex(self.Fh(complex(z))) - ref) / abs(ref))
        worst = max(gaps)
        if worst > tol:
            raise ClosedFormMismatch(f"{self.closed_form}: closed-form image off by {worst:.2e}")
        return worst

    def kh_closed(self, x, y):
        """Closed form of k_h(x, y), or None for generic kernels."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.sqrt(x + y)
        if self.closed_form == "half_inverse_sqrt":
            return math.pi * np.sqrt(x) * np.exp(-2.0 * r) / r
        if self.closed_form == "power":
            b = self.beta
            return 2.0 * math.gamma(b) * (x / r) ** b * besselk(b, x + y).real
        return None


def convolve(f: RealFunction, g: RealFunction, x, tol: float = 1e-10,
             full_output: bool = False):
    """(f * g)(x) = 2 * double integral of K_0(2 sqrt((x+u)(x+v)/x)) f(u) g(v) du dv.

    ``x`` may be an array; all points share the quadrature nodes.
    """
    x_arr = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x_arr).ravel()
    if np.any(xs <= 0):
        raise ValidationError("convolution needs x > 0")

    def f2(u, v):
        # u: (1, n_u), v: (n_v, 1) -> (n_v, n_u, n_x)
        arg = _k0_arg(xs[None, None, :], u[..., None], v[..., None])
        return 2.0 * k0(arg) * (f(u) * g(v))[..., None]

    res = integrate_quarterplane(f2, tol, tol,
                                 origin_exponents=(f.origin_exponent, g.origin_exponent))
    value = np.asarray(res.value).reshape(x_arr.shape)
    err = np.asarray(res.err_abs).reshape(x_arr.shape)
    if full_output:
        return QuadResult(value if x_arr.ndim else complex(value), err if x_arr.ndim else float(err),
                          res.evals, res.converged)
    return value if x_arr.ndim else complex(value)


def convolution_function(f: RealFunction, g: RealFunction, tol: float = 1e-10) -> RealFunction:
    """x -> (f * g)(x) as a RealFunction (each evaluation is a 2-D quadrature)."""
    return RealFunction(lambda x: convolve(f, g, np.asarray(x, dtype=float), tol),
                        CONV_ORIGIN_EXPONENT, CONV_DECAY, name=f"{f.name}*{g.name}")


def kernel_product_sides(x: float, y: float, z, tol: float = 1e-10):
    """Both sides of 2 (xy)^{z/2} K_z(2 sqrt x) K_z(2 sqrt y) = integral of K_0(2 sqrt((x+v)(y+v)/v)) v^{z-1} dv."""
    if x <= 0 or y <= 0:
        raise ValidationError("kernel product needs x, y > 0")
    z = complex(z)
    left = 0.5 * kl_kernel(z, x) * kl_kernel(z, y)
    left = complex(np.asarray(left))

    def integrand(v):
        return k0(2.0 * np.sqrt((x + v) * (y + v) / v)) * np.exp((z - 1.0) * np.log(v))

    # the integrand vanishes faster than any power as v -> 0
    right = integrate_halfline(integrand, tol, tol, origin_exponent=max(z.real - 1.0, 1.0),
                               split=min(x, y), label="kernel product")
    return left, right


def kernel_product_check(x: float, y: float, z, tol: float = 1e-10) -> float:
    """Relative gap between the two sides of the kernel product formula."""
    left, right = kernel_product_sides(x, y, z, tol)
    return abs(left - right.value) / abs(left)


def kernel_kh_quadrature(spec: KernelSpec, x: float, y: float, tol: float = 1e-10) -> float:
    """k_h(x, y) = 2 * integral of K_0(2 sqrt((x+y)(x+u)/x)) h(u) du by quadrature only."""
    if x <= 0 or y <= 0:
        raise ValidationError("k_h needs x, y > 0")
    c = math.sqrt((x + y) / x)

    def integrand(u):
        return 2.0 * k0(2.0 * c * np.sqrt(x + u)) * spec.h(u)

    return complex(integrate_halfline(integrand, 0.1 * tol, 0.1 * tol,
                                      origin_exponent=spec.h.origin_exponent, split=x,
                                      label="k_h").value).real


def kernel_kh(spec: KernelSpec, x: float, y: float, tol: float = 1e-10) -> float:
    """k_h(x, y), from the closed form when the kernel has one.

    The closed value is returned only after checking the quadrature against it.

    Raises
    ------
    ClosedFormMismatch
        If quadrature and closed form differ by more than 10 * tol (relative).
    """
    quad = kernel_kh_quadrature(spec, x, y, tol)
    closed = spec.kh_closed(x, y)
    if closed is None:
        return quad
    closed = float(closed)
    if closed == 0.0:
        return closed
    gap = abs(quad - closed) / abs(closed)
    if gap > 10 * tol:
        raise ClosedFormMismatch(f"k_h({x}, {y}): quadrature and closed form differ by {gap:.2e}")
    return closed


def factorization_check(f: RealFunction, g: RealFunction, z, tol: float = 1e-8,
                        full_output: bool = False):
    """Relative gap between M[f * g](z) and (Ff)(z) (Fg)(z)."""
    z = complex(z)
    conv = convolution_function(f, g, 0.01 * tol)
    left = mellin_forward(conv, z, tol)
    right = forward(f, z, 0.01 * tol) * forward(g, z, 0.01 * tol)
    scale = max(abs(right), abs(left))
    residual = 0.0 if scale == 0 else abs(left - right) / scale
    if full_output:
        return residual, left, right
    return residual


def weighted_norm(f: RealFunction, alpha: float, tol: float = 1e-10) -> float:
    """Norm of f in L1(2 x^{alpha/2} K_alpha(2 sqrt x) dx)."""
    w_exp = min(alpha, 0.0) - (0.01 if alpha == 0 else 0.0)
    return integrate_halfline(lambda x: np.abs(f(x)) * kl_kernel(alpha, x).real, tol, tol,
                              origin_exponent=max(f.origin_exponent + w_exp, -0.99),
                              label="weighted norm").value.real


def young_norms(f: RealFunction, g: RealFunction, alpha: float = 1.0, tol: float = 1e-8):
    """(||f * g|| in L1(x^{alpha-1} dx), ||f|| ||g|| in L1(2 x^{alpha/2} K_alpha(2 sqrt x) dx)).

    Returns ``(lhs, rhs, err)`` where ``err`` bounds the quadrature error of
    the difference.
    """
    rhs = weighted_norm(f, alpha, 0.01 * tol) * weighted_norm(g, alpha, 0.01 * tol)
    if rhs == 0:
        return 0.0, 0.0, 0.0

    def integrand(x):
        return np.abs(convolve(f, g, x, 0.01 * tol)) * x ** (alpha - 1.0)

    res = integrate_halfline(integrand, tol, tol,
                             origin_exponent=CONV_ORIGIN_EXPONENT + alpha - 1.0,
                             label="Young lhs")
    return float(res.value.real), float(rhs), float(res.err_abs) + 1e-8 * rhs


def _image(f: RealFunction):
    return TransformImage.from_function(f)


def parseval_sides(f: RealFunction, g: RealFunction, alpha: float = 0.5, tol: float = 1e-8):
    """Both sides of integral of |f*g|^2 x^{2 alpha - 1} dx = (1/2pi) integral of |(Ff)(Fg)(alpha + it)|^2 dt."""
    if alpha <= 0:
        raise DomainViolation("Parseval identity needs alpha > 0")

    def lhs_integrand(x):
        return np.abs(convolve(f, g, x, 0.01 * tol)) ** 2 * x ** (2 * alpha - 1.0)

    lhs = integrate_halfline(lhs_integrand, tol, tol,
                             origin_exponent=2 * CONV_ORIGIN_EXPONENT + 2 * alpha - 1.0,
                             label="Parseval lhs")
    Ff, Fg = _image(f), _image(g)
    env_f, env_g = Ff.envelope_at(alpha), Fg.envelope_at(alpha)
    env = Envelope((env_f.C * env_g.C) ** 2, 2 * (env_f.p + env_g.p), 2 * (env_f.a + env_g.a))
    if not env.integrable:
        raise DomainViolation("image envelope does not make the line integral converge")
    spec = ContourSpec(gamma=alpha, tol=0.1 * tol, rtol=0.1 * tol)

    def line(z):
        return np.abs(Ff(z) * Fg(z)) ** 2 + 0j

    rhs = integrate_contour(line, spec, env, symmetric=True)
    return lhs, rhs


def parseval_check(f: RealFunction, g: RealFunction, alpha: float = 0.5, tol: float = 1e-8) -> float:
    """Relative gap between the two sides of the Parseval identity."""
    lhs, rhs = parseval_sides(f, g, alpha, tol)
    scale = max(abs(lhs.value), abs(rhs.value))
    return 0.0 if scale == 0 else abs(lhs.value - rhs.value) / scale
