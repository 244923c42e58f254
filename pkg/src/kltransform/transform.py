"""The index transform (Ff)(z) = 2 * integral of x^{z/2} K_z(2 sqrt x) f(x) dx over (0, inf).

Forward evaluation by three routes (direct kernel quadrature, the Mellin
route through f*, and the Laplace composition route), the operational
identities, inversion along vertical lines and the closed-form index
integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import (DomainViolation, EnvelopeTooWeak, IdentityResidualExceeded,
                     PoleOnContour, ValidationError)
from .mellin import (Decay, LineFunction, RayMellin, RealFunction, inverse_mellin, laplace,
                     mellin_forward)
from .quad import ContourSpec, Envelope, QuadResult, integrate_contour, integrate_halfline
from .specfun import ikernel, kl_kernel, log_gamma

__all__ = [
    "ImageEnvelope",
    "TransformImage",
    "lower_bound",
    "default_gamma",
    "forward",
    "forward_mellin_route",
    "forward_laplace_route",
    "forward_tail",
    "derivative_line",
    "derivative_shift_check",
    "invert",
    "invert_expansion",
    "expansion_integral",
    "laplace_identity",
    "index_integral_exp",
    "index_integral_bessel",
    "image_nonvanishing",
]

HALF_PI = 0.5 * np.pi
DOMAIN_MARGIN = 1e-3


@dataclass(frozen=True)
class ImageEnvelope:
    """|(Ff)(gamma + i tau)| <= C |tau|^{gamma + p_offset} e^{-a |tau|} for |tau| >= 1.

    ``C = None`` means "estimate from samples on the requested line".
    """

    C: Optional[float]
    p_offset: float
    a: float = HALF_PI

    def at(self, gamma_: float, C: Optional[float] = None) -> Envelope:
        return Envelope(self.C if C is None else C, gamma_ + self.p_offset, self.a)


class TransformImage:
    """(Ff)(z) on the half-plane Re z > lower_bound with a vertical-line envelope.

    Build with :meth:`from_function`, :meth:`from_line` or :meth:`closed_form`.
    """

    def __init__(self, func: Callable, lower_bound: float, envelope: ImageEnvelope,
                 source=None, real_valued: bool = True, name: str = "Ff"):
        self.func = func
        self.lower_bound = float(lower_bound)
        self.envelope = envelope
        self.source = source
        self.real_valued = real_valued
        self.name = name
        self._C_cache: dict = {}

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.asarray(self.func(z), dtype=complex) * np.ones(z.shape)

    @property
    def c0(self) -> float:
        return self.lower_bound + 1.0

    def envelope_at(self, gamma_: float) -> Envelope:
        if self.envelope.C is not None:
            return self.envelope.at(gamma_)
        if gamma_ not in self._C_cache:
            taus = np.array([1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
            vals = np.abs(self(gamma_ + 1j * taus))
            unit = self.envelope.at(gamma_, C=1.0).bound(taus)
            self._C_cache[gamma_] = 2.0 * float(np.max(vals / unit))
        return self.envelope.at(gamma_, C=self._C_cache[gamma_])

    def check_analytic(self, probes, h: float = 1e-4) -> float:
        """Largest Cauchy-Riemann residual |dF/dy - i dF/dx| / |F| at the probes."""
        z = np.asarray(probes, dtype=complex)
        fx = (self(z + h) - self(z - h)) / (2 * h)
        fy = (self(z + 1j * h) - self(z - 1j * h)) / (2 * h)
        scale = np.maximum(np.abs(self(z)), 1e-300)
        return float(np.max(np.abs(fy - 1j * fx) / scale))

    def check_envelope(self, gamma_: float, taus=None) -> bool:
        if taus is None:
            taus = np.array([1.0, 3.0, 10.0, 30.0])
        env = self.envelope_at(gamma_)
        return bool(np.all(np.abs(self(gamma_ + 1j * taus)) <= 10.0 * env.bound(taus)))

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, lower_bound: float = -1.0) -> "TransformImage":
        return cls(lambda z: np.zeros(np.shape(z), dtype=complex), lower_bound,
                   ImageEnvelope(0.0, 0.0, HALF_PI), name="0")

    @classmethod
    def closed_form(cls, func: Callable, lower_bound: float, envelope: ImageEnvelope,
                    name: str = "Ff") -> "TransformImage":
        return cls(func, lower_bound, envelope, name=name)

    @classmethod
    def from_function(cls, f: RealFunction, envelope: Optional[ImageEnvelope] = None,
                      tol: float = 1e-12) -> "TransformImage":
        """Image of a RealFunction by the Laplace composition route.

        (Ff)(z) is the Mellin transform of t -> e^{-t} (Lf)(1/t). That function
        is analytic for |arg t| < pi/2, so the Mellin integral is taken along
        the ray arg t = +-0.45 pi, keeping full relative accuracy far up the
        line where the real-axis integral would cancel catastrophically.
        """
        if envelope is None:
            envelope = ImageEnvelope(None, f.origin_exponent + 0.5, HALF_PI)
        lam0 = f.origin_exponent + 1.0
        lb = lower_bound(f)

        def phi(t):
            t = np.asarray(t, dtype=complex)
            return np.exp(-t) * laplace(f, 1.0 / t, tol)

        theta = 0.9 * HALF_PI
        u_min = -min(45.0, 45.0 / max(lam0 + lb + DOMAIN_MARGIN, 1e-3))
        rays = {}

        def ray(sign):
            if sign not in rays:
                rays[sign] = RayMellin(phi, lam0, sign * theta, None, u_min, probe_re=2.0)
            return rays[sign]

        def func(z):
            z = np.asarray(z, dtype=complex)
            flat = z.ravel()
            out = np.empty(flat.size, dtype=complex)
            if np.any(flat.real <= lb):
                raise DomainViolation(f"Re z must exceed {lb:.4g}")
            for sign in (1.0, -1.0):
                mask = flat.imag >= 0 if sign > 0 else flat.imag < 0
                if np.any(mask):
                    out[mask] = ray(sign)(flat[mask], tol)[0]
            return out.reshape(z.shape)

        return cls(func, lb, envelope, source=f, name=f"F[{f.name}]")

    @classmethod
    def from_line(cls, fstar: LineFunction, envelope: Optional[ImageEnvelope] = None,
                  h: float = 0.02, chunk: int = 256) -> "TransformImage":
        """Image of the function represented by f* through the Mellin route.

        The line integral over s = c0 + i sigma is summed by the trapezoid rule
        on a common sigma grid, in log space.
        """
        c0 = fstar.c0
        if c0 >= 1:
            raise DomainViolation("the Mellin route needs c0 < 1")
        if envelope is None:
            envelope = ImageEnvelope(None, 0.5 - c0 + fstar.envelope.p, HALF_PI + fstar.envelope.a)
        a_total = np.pi + fstar.envelope.a
        reach = 80.0 / a_total + 10.0

        def func(z):
            z = np.asarray(z, dtype=complex)
            flat = z.ravel()
            out = np.empty(flat.size, dtype=complex)
            if np.any(flat.real <= c0 - 1.0):
                raise DomainViolation(f"Re z must exceed c0 - 1 = {c0 - 1:.4g}")
            order = np.argsort(flat.imag)
            for start in range(0, flat.size, chunk):
                idx = order[start:start + chunk]
                zc = flat[idx]
                lo = min(0.0, float(zc.imag.min())) - reach
                hi = max(0.0, float(zc.imag.max())) + reach
                sig = np.arange(math.floor(lo / h), math.ceil(hi / h) + 1) * h
                s = c0 + 1j * sig
                base = log_gamma(1.0 - s)
                fs = fstar(s)
                lg = log_gamma(1.0 - s[None, :] + zc[:, None]) + base[None, :]
                out[idx] = (h / (2 * np.pi)) * (np.exp(lg) @ fs)
            return out.reshape(z.shape)

        return cls(func, c0 - 1.0, envelope, source=fstar, real_valued=fstar.real_valued,
                   name=f"F[{fstar.name}]")


ImageLike = Union[TransformImage, Callable]


def lower_bound(f: RealFunction) -> float:
    """Half-plane bound for Re z implied by f's origin behaviour (c0 - 1 with c0 = -origin_exponent)."""
    return -1.0 - f.origin_exponent


def default_gamma(image: TransformImage, upper: float = 0.0) -> float:
    """Midpoint of the admissible inversion strip (lower_bound, upper)."""
    return 0.5 * (max(image.lower_bound, -2.0 + upper) + upper)


# ---------------------------------------------------------------------------
# forward routes
# ---------------------------------------------------------------------------


def _check_domain(z: complex, lb: float, what: str):
    if z.real <= lb + DOMAIN_MARGIN * 0.0 or z.real <= lb:
        raise DomainViolation(f"{what}: Re z = {z.real:.4g} must exceed {lb:.4g}")


def forward(f: RealFunction, z, tol: float = 1e-10, full_output: bool = False):
    """(Ff)(z) = 2 * integral of x^{z/2} K_z(2 sqrt x) f(x) dx, by direct quadrature.

    Raises
    ------
    DomainViolation
        If Re z does not exceed the bound implied by f's origin exponent.
    """
    z = complex(z)
    _check_domain(z, lower_bound(f), f"forward({f.name})")
    kernel_exp = min(z.real, 0.0) - (0.01 if abs(z.real) < 1e-12 else 0.0)
    res = integrate_halfline(lambda x: kl_kernel(z, x) * f(x), tol, tol,
                             origin_exponent=max(f.origin_exponent + kernel_exp, -0.999),
                             label=f"forward({f.name})")
    return res if full_output else res.value


def _mellin_route_envelope(fstar: LineFunction, z: complex) -> Envelope:
    env = fstar.envelope
    shift = 0.5 - fstar.c0 + z.real
    tau = abs(z.imag)
    C = 20.0 * 2 * np.pi * env.C * np.exp(HALF_PI * tau) * (2.0 + tau) ** abs(shift)
    return Envelope(C, shift + 0.5 - fstar.c0 + env.p, np.pi + env.a)


def forward_mellin_route(fstar: LineFunction, z, tol: float = 1e-10, full_output: bool = False):
    """(Ff)(z) = (1/2 pi i) * integral of Gamma(1-s+z) Gamma(1-s) f*(s) ds on Re s = c0.

    Raises
    ------
    DomainViolation
        If Re z <= c0 - 1.
    PoleOnContour
        If a gamma pole sits on the line (needs c0 < 1 and Re z > c0 - 1).
    """
    z = complex(z)
    c0 = fstar.c0
    if c0 >= 1.0 or abs(z.real - (c0 - 1.0)) < 1e-9:
        raise PoleOnContour(f"gamma pole on the line Re s = {c0}")
    _check_domain(z, c0 - 1.0, "forward_mellin_route")
    poles = (1.0 + 0j, 1.0 + z)
    spec = ContourSpec(gamma=c0, tol=tol, rtol=tol, poles=poles)

    def integrand(s):
        return np.exp(log_gamma(1.0 - s + z) + log_gamma(1.0 - s)) * fstar(s)

    symmetric = fstar.real_valued and z.imag == 0
    res = integrate_contour(integrand, spec, _mellin_route_envelope(fstar, z),
                            symmetric=symmetric, check_envelope=False)
    return res if full_output else res.value


def forward_laplace_route(f: RealFunction, z, tol: float = 1e-10, alpha: Optional[float] = None,
                          full_output: bool = False):
    """(Ff)(z) as the Mellin transform of t -> e^{-t} (Lf)(1/t).

    ``alpha`` (or ``f.alpha``) declares f in L1(x^{(alpha-|alpha|)/2} dx);
    the admissible half-plane is Re z >= 0 for alpha > 0 and Re z >= alpha
    for alpha < 0.
    """
    z = complex(z)
    alpha = f.alpha if alpha is None else alpha
    if alpha is None:
        alpha = 1.0
    if alpha == 0:
        raise ValidationError("alpha must be nonzero")
    bound = 0.0 if alpha > 0 else alpha
    if z.real < bound:
        raise DomainViolation(f"forward_laplace_route: Re z must be >= {bound} for alpha = {alpha}")
    _check_domain(z, lower_bound(f), "forward_laplace_route")

    def phi(t):
        t = np.asarray(t)
        return np.exp(-t) * laplace(f, 1.0 / t, 1e-13)

    comp = RealFunction(phi, origin_exponent=f.origin_exponent + 1.0, decay=Decay(rate=1.0),
                        sector=HALF_PI, name=f"e^-t L{f.name}(1/t)")
    value = mellin_forward(comp, z, tol)
    if full_output:
        return QuadResult(value, tol * max(abs(value), 1.0), 0, True)
    return value


# ---------------------------------------------------------------------------
# operational identities
# ---------------------------------------------------------------------------


def _tail_integral(func: Callable, y: float, z: complex, tol: float, origin=0.0):
    return integrate_halfline(lambda u: kl_kernel(z, y + u) * func(y + u), tol, tol,
                              origin_exponent=origin, split=max(y, 1.0), label="tail")


def forward_tail(f: RealFunction, y: float, z, n: int, tol: float = 1e-11,
                 residual_tol: float = 1e-6) -> QuadResult:
    """Truncated transform (Ff)_y(z) with the boundary-sum identity check.

    Returns a QuadResult whose value is the direct integral
    2 * integral over (y, inf) of x^{z/2} K_z(2 sqrt x) f(x) dx and whose
    ``info['residual']`` is the relative gap to

        sum_{m<n} 2 y^{(z+m+1)/2} K_{z+m+1}(2 sqrt y) f^{(m)}(y) + (F f^{(n)})_y(z+n).

    Raises
    ------
    IdentityResidualExceeded
        If the two sides differ by more than ``residual_tol`` (relative).
    """
    z = complex(z)
    if y <= 0 or n < 0:
        raise ValidationError("need y > 0 and n >= 0")
    direct = _tail_integral(f.func, y, z, tol)
    boundary = 0j
    for m in range(n):
        boundary += kl_kernel(z + m + 1, y) * complex(np.asarray(f.derivative(m)(np.array([y])))[0])
    if n > 0:
        rest = _tail_integral(f.derivative(n), y, z + n, tol)
        other = boundary + rest.value
    else:
        other = direct.value
    gap = abs(direct.value - other)
    residual = gap / max(abs(direct.value), 1e-300)
    res = QuadResult(direct.value, max(direct.err_abs, gap), direct.evals, direct.converged,
                     {"residual": residual, "boundary_form": other})
    if residual > residual_tol:
        raise IdentityResidualExceeded(
            f"forward_tail: boundary form differs by {residual:.2e} (relative); check derivative inputs")
    return res


def _pochhammer(s, n: int):
    out = np.ones_like(s)
    for k in range(n):
        out = out * (s + k)
    return out


def derivative_line(fstar: LineFunction, n: int) -> LineFunction:
    """f^{(n)} as a LineFunction on Re s = c0 + n: s -> (-1)^n (s-n)_n f*(s-n)."""
    env = fstar.envelope
    C = env.C * (2.0 + abs(fstar.c0) + n) ** n * 2.0 ** n

    def func(s):
        s = np.asarray(s, dtype=complex)
        return (-1.0) ** n * _pochhammer(s - n, n) * fstar(s - n)

    return LineFunction(fstar.c0 + n, func, Envelope(C, env.p + n, env.a), fstar.real_valued,
                        tuple(p + n for p in fstar.poles), name=f"d^{n} {fstar.name}")


def _line_as_function(F: LineFunction, tol: float, name: str) -> RealFunction:
    """RealFunction evaluated pointwise by inverse Mellin transform of F."""

    def func(x):
        x = np.asarray(x, dtype=float)
        return inverse_mellin(F, x.ravel(), tol=tol).reshape(x.shape)

    # |f(x)| <= norm * x^{-c0} on both sides
    decay = Decay(rate=0.0, power=-F.c0)
    return RealFunction(func, -F.c0, decay, name=name)


def derivative_shift_check(fstar: LineFunction, n: int, z, tol: float = 1e-10) -> float:
    """Relative gap between (F f^{(n)})(z) and (Ff)(z - n).

    f and f^{(n)} are evaluated by inverse Mellin transforms (the latter from
    the shifted line of :func:`derivative_line`), then both transforms are
    computed by direct kernel quadrature.
    """
    z = complex(z)
    if n == 0:
        return 0.0
    c0 = fstar.c0
    if not c0 < 1 - n:
        raise DomainViolation(f"derivative shift needs c0 < 1 - n (c0 = {c0}, n = {n})")
    if not z.real > c0 + n - 1:
        raise DomainViolation(f"derivative shift needs Re z > c0 + n - 1 = {c0 + n - 1}")
    f = _line_as_function(fstar, tol, fstar.name)
    fn = _line_as_function(derivative_line(fstar, n), tol, f"d^{n}")
    lhs = forward(fn, z, tol)
    rhs = forward(f, z - n, tol)
    return abs(lhs - rhs) / abs(rhs)


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------


def _inversion_envelope(Ff: TransformImage, gamma_: float, strict: bool, t_max: float,
                        t_min: float) -> Envelope:
    env = Ff.envelope_at(gamma_)
    if env.a < HALF_PI:
        raise EnvelopeTooWeak(
            f"inversion: image decays like e^(-{env.a:.3g}|tau|), slower than e^(-pi|tau|/2)")
    q = env.p + gamma_ + 0.5
    if env.a == HALF_PI:
        if q >= 0:
            raise EnvelopeTooWeak(
                f"inversion: inversion integrand grows like |tau|^{q:.3g} on Re z = {gamma_}")
        if strict and q >= -1:
            raise EnvelopeTooWeak(
                f"inversion: integrand |tau|^{q:.3g} is not absolutely integrable (strict mode)")
    # I-kernel bound: e^t t^{-1-gamma} |tau|^{gamma+1/2} e^{pi|tau|/2} * 2/sqrt(2 pi)
    kfac = 2.0 / math.sqrt(2 * math.pi) * math.exp(t_max) * max(t_max ** (-1 - gamma_), t_min ** (-1 - gamma_))
    return Envelope(env.C * kfac, q, env.a - HALF_PI)


def _safe_log(v):
    v = np.asarray(v, dtype=complex)
    with np.errstate(divide="ignore"):
        return np.where(v == 0, -np.inf + 0j, np.log(np.where(v == 0, 1.0, v)))


def _validated_spec(Ff: TransformImage, spec: Optional[ContourSpec], tol: float) -> ContourSpec:
    if spec is None:
        spec = ContourSpec(gamma=default_gamma(Ff), tol=tol, rtol=tol)
    if not (Ff.lower_bound < spec.gamma < 0):
        raise DomainViolation(
            f"inversion: contour Re z = {spec.gamma} must lie in ({Ff.lower_bound:.4g}, 0)")
    if spec.pole_distance == math.inf:
        spec = ContourSpec(spec.gamma, spec.truncation, spec.step, spec.tol, spec.rtol,
                           (Ff.lower_bound,), spec.taper, spec.max_height, spec.taper_start)
    return spec


def invert(Ff: ImageLike, t, spec: Optional[ContourSpec] = None, strict: bool = False,
           tol: float = 1e-10, full_output: bool = False):
    """Inverse transform f(t) = (1/2 pi i) * integral of I_{-(1+z)}(2 sqrt t) t^{-(1+z)/2} (Ff)(z) dz.

    Parameters
    ----------
    Ff : TransformImage
        Image with lower bound and envelope.
    t : float or array_like
        Evaluation points (all share the contour samples of Ff).
    spec : ContourSpec, optional
        Contour; gamma must lie in (lower_bound, 0). Defaults to the midpoint.
    strict : bool
        Require absolute integrability (envelope exponent below -1); by
        default a conditionally convergent integrand is accepted and summed
        with a smooth taper.

    Raises
    ------
    EnvelopeTooWeak
        If the envelope does not make the integral converge on the line.
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    ts = np.atleast_1d(t_arr).ravel()
    if np.any(ts <= 0):
        raise ValidationError("t must be positive")
    spec = _validated_spec(Ff, spec, tol)
    env = _inversion_envelope(Ff, spec.gamma, strict, float(ts.max()), float(ts.min()))

    def integrand(z):
        logF = _safe_log(Ff(z))
        return ikernel(-(1.0 + z[:, None]), ts[None, :], logF[:, None])

    res = integrate_contour(integrand, spec, env, symmetric=Ff.real_valued)
    value = np.asarray(res.value)
    if full_output:
        return res
    return complex(value[0]) if scalar else value


def _ikernel_xderiv(z, x, log_scale):
    """d/dx [x^{-z/2} I_{-z}(2 sqrt x)] * exp(log_scale), by term-wise differentiation.

    sum_n (n - z) x^{n-z-1} / (n! Gamma(n+1-z)); the n = 0 term carries the
    factor -z/Gamma(1-z) = 1/Gamma(-z), so the leading scale is x^{-z-1}/Gamma(1-z).
    """
    lead = (-z - 1.0) * np.log(x) - log_gamma(1.0 - z) + log_scale
    term = np.ones(np.broadcast(z, x).shape, dtype=complex)
    total = -z * term
    for n in range(1, 201):
        term = term * x / (n * (n - z))
        contrib = (n - z) * term
        total = total + contrib
        nxt = np.abs(x / ((n + 1) * (n + 1 - z)))
        if np.all((np.abs(contrib) <= 1e-17 * np.abs(total)) & (nxt < 0.5)):
            break
    with np.errstate(under="ignore", over="ignore"):
        return np.exp(lead) * total


def _expansion_params(Ff: TransformImage, gamma_: float, c0, epsilon):
    if c0 is None and epsilon is None:
        # choose c0 in (max(c_lo, 2 gamma + 1), min(1, 1 + gamma)) and eps just below c0
        lo = max(Ff.c0, 2 * gamma_ + 1)
        hi = min(1.0, 1.0 + gamma_)
        if not lo < hi:
            raise DomainViolation(f"expansion inversion: no admissible (c0, eps) for gamma = {gamma_}")
        c0 = 0.5 * (lo + hi)
        epsilon = 0.5 * (max(2 * c0 - 1, 2 * gamma_ + 1) + c0)
    if c0 is None or epsilon is None:
        raise ValidationError("give both c0 and epsilon, or neither")
    if not (2 * c0 - 1 < epsilon < c0):
        raise DomainViolation(f"expansion inversion: epsilon = {epsilon} must lie in ({2 * c0 - 1}, {c0})")
    if not (c0 - 1 < gamma_ < 0.5 * (epsilon - 1)):
        raise DomainViolation(
            f"expansion inversion: gamma = {gamma_} must lie in ({c0 - 1}, {(epsilon - 1) / 2})")
    return c0, epsilon


def invert_expansion(Ff: ImageLike, x, spec: Optional[ContourSpec] = None, c0=None, epsilon=None,
                     strict: bool = False, tol: float = 1e-10, full_output: bool = False):
    """f(x) as d/dx of (1/2 pi i) * integral of I_{-z}(2 sqrt x) x^{-z/2} (Ff)(z) dz.

    The x-derivative is taken under the integral sign, term by term in the
    power series of I_{-z}, so the integrand is the derivative of the
    expansion kernel rather than a call to the inversion kernel.

    ``c0`` and ``epsilon`` fix the expansion parameters; when omitted an
    admissible pair is chosen (one exists for every gamma in (lower_bound, 0)).
    """
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    xs = np.atleast_1d(x_arr).ravel()
    if np.any(xs <= 0):
        raise ValidationError("x must be positive")
    spec = _validated_spec(Ff, spec, tol)
    c0, epsilon = _expansion_params(Ff, spec.gamma, c0, epsilon)
    env = _inversion_envelope(Ff, spec.gamma, strict, float(xs.max()), float(xs.min()))

    def integrand(z):
        logF = _safe_log(Ff(z))
        return _ikernel_xderiv(z[:, None], xs[None, :], logF[:, None])

    res = integrate_contour(integrand, spec, env, symmetric=Ff.real_valued)
    res.info.update({"c0": c0, "epsilon": epsilon})
    if full_output:
        return res
    value = np.asarray(res.value)
    return complex(value[0]) if scalar else value


def expansion_integral(Ff: ImageLike, x, spec: Optional[ContourSpec] = None, tol: float = 1e-10):
    """The undifferentiated expansion integral (1/2 pi i) * integral of I_{-z}(2 sqrt x) x^{-z/2} (Ff)(z) dz.

    Its x-derivative is f(x); used as an independent finite-difference check.
    """
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    xs = np.atleast_1d(x_arr).ravel()
    spec = _validated_spec(Ff, spec, tol)
    env = Ff.envelope_at(spec.gamma)
    q = env.p + spec.gamma - 0.5
    kfac = 2.0 / math.sqrt(2 * math.pi) * math.exp(xs.max()) * max(xs.max(), 1 / xs.min()) ** abs(spec.gamma)
    line_env = Envelope(env.C * kfac, q, env.a - HALF_PI)

    def integrand(z):
        logF = _safe_log(Ff(z))
        return ikernel(-z[:, None], xs[None, :], logF[:, None])

    res = integrate_contour(integrand, spec, line_env, symmetric=Ff.real_valued)
    value = np.asarray(res.value)
    return complex(value[0]) if scalar else value


def laplace_identity(Ff: ImageLike, x: float, gamma_: Optional[float] = None, tol: float = 1e-10) -> complex:
    """(1/2 pi i) * integral of (Ff)(z) e^{1/x} x^z dz on Re z = gamma, which equals (Lf)(x)."""
    if gamma_ is None:
        gamma_ = Ff.lower_bound + 0.5
    if gamma_ <= Ff.lower_bound:
        raise DomainViolation("laplace identity needs gamma above the image's lower bound")
    env = Ff.envelope_at(gamma_).scaled(math.exp(1.0 / x) * x ** gamma_)
    spec = ContourSpec(gamma=gamma_, tol=tol, rtol=tol, poles=(Ff.lower_bound,))

    def integrand(z):
        return Ff(z) * np.exp(1.0 / x + z * math.log(x))

    return integrate_contour(integrand, spec, env, symmetric=Ff.real_valued).value


# ---------------------------------------------------------------------------
# closed-form index integrals
# ---------------------------------------------------------------------------


def index_integral_exp(x, nu: float = 0.25, tol: float = 1e-10) -> QuadResult:
    """(1/2 pi i) * integral of I_{-z}(2 sqrt x) Gamma(z)/(2z+1) x^{-z/2} dz on Re z = nu.

    Equals exp(-2 sqrt x) for nu in (0, 1/2).
    """
    if not 0 < nu < 0.5:
        raise DomainViolation("index integral needs nu in (0, 1/2)")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    spec = ContourSpec(gamma=nu, tol=tol, rtol=tol, poles=(0.0, -0.5))

    def integrand(z):
        return ikernel(-z[:, None], xs[None, :], (log_gamma(z) - np.log(2 * z + 1))[:, None])

    res = integrate_contour(integrand, spec, None, symmetric=True)
    if np.ndim(x) == 0:
        res.value = complex(np.asarray(res.value)[0])
        res.err_abs = float(np.asarray(res.err_abs)[0])
    return res


def index_integral_bessel(x, mu: float = 0.5, nu: float = 0.375, tol: float = 1e-10) -> QuadResult:
    """(1/4 pi i) * integral of I_{-z}(2 sqrt x) Gamma(z+mu/2) Gamma(z-mu/2)/Gamma(z+1) x^{-z/2} dz.

    Equals K_mu(2 sqrt x) / (Gamma(1+mu/2) Gamma(1-mu/2)) on Re z = nu, nu in (mu/2, 1/2).
    """
    if not (abs(mu) / 2 < nu < 0.5):
        raise DomainViolation("index integral needs nu in (|mu|/2, 1/2)")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    spec = ContourSpec(gamma=nu, tol=tol, rtol=tol, poles=(mu / 2, -mu / 2, 0.0))

    def integrand(z):
        lg = log_gamma(z + mu / 2) + log_gamma(z - mu / 2) - log_gamma(z + 1)
        return 0.5 * ikernel(-z[:, None], xs[None, :], lg[:, None])

    res = integrate_contour(integrand, spec, None, symmetric=True)
    if np.ndim(x) == 0:
        res.value = complex(np.asarray(res.value)[0])
        res.err_abs = float(np.asarray(res.err_abs)[0])
    return res


def image_nonvanishing(f: RealFunction, gamma_: float, taus=(0.0, 0.5, 1.0, 2.0, 4.0),
                       tol: float = 1e-10) -> float:
    """Largest |(Ff)(gamma + i tau)| over the probes (a zero image would be 0)."""
    return max(abs(forward(f, gamma_ + 1j * t, tol)) for t in taus)
