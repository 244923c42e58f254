"""First-kind convolution equations  integral of k_h(x, y) f(y) dy = g(x).

The solution is recovered from the Mellin transform of g divided by the
image of the kernel h, followed by the index-transform inversion along a
vertical line Re z = gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import kve

from .convolution import KernelSpec, kernel_kh
from .errors import (DomainViolation, EnvelopeTooWeak, KernelZeroOnContour, NonConvergence,
                     ValidationError)
from .mellin import Decay, GridFunction, RayMellin, RealFunction, mellin_many
from .quad import ContourSpec, integrate_halfline
from .specfun import ikernel
from .transform import HALF_PI, ImageEnvelope, TransformImage, invert

__all__ = ["SolveConfig", "synthesize_rhs", "solve", "quotient_image"]

# zero_guard is compared with |Fh(gamma + i tau)| * exp(pi |tau| / 2), the
# kernel image with its generic exponential decay removed
GUARD_HEIGHT = 60.0
ENVELOPE_TAUS = np.array([4.0, 8.0, 16.0, 32.0])
ROUNDING = 1e-15
MIN_HEIGHT = 16.0


@dataclass(frozen=True)
class SolveConfig:
    """Contour and weight parameters for :func:`solve`.

    Attributes
    ----------
    kernel : KernelSpec
    gamma : float
        Abscissa of the inversion contour, in (alpha, 0).
    alpha : float
        Weight exponent, negative; bounds the half-plane of the quotient image.
    tol : float
        Target accuracy of the contour integral.
    zero_guard : float
        Smallest admissible |Fh| e^{pi |tau|/2} on the contour.
    """

    kernel: KernelSpec
    gamma: float
    alpha: float
    tol: float = 1e-8
    zero_guard: float = 1e-12

    def __post_init__(self):
        if not self.alpha < 0:
            raise DomainViolation(f"solver: alpha = {self.alpha} must be negative")
        if not self.alpha < self.gamma < 0:
            raise DomainViolation(f"solver: gamma = {self.gamma} must lie in (alpha, 0) = ({self.alpha}, 0)")
        if self.gamma <= self.kernel.lower_bound:
            raise DomainViolation(
                f"solver: gamma = {self.gamma} must exceed the kernel image bound {self.kernel.lower_bound}")
        if not self.zero_guard > 0:
            raise ValidationError("zero_guard must be positive")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")


def _kve(order: float, w):
    """Scaled K_order(w) e^w; large |w| uses the asymptotic series (scipy returns nan there)."""
    w = np.asarray(w, dtype=complex)
    out = kve(order, w)
    big = ~np.isfinite(out) & (np.abs(w) > 1e4)
    if np.any(big):
        wb = w[big]
        mu = 4.0 * order * order
        series = 1.0 + (mu - 1) / (8 * wb) + (mu - 1) * (mu - 9) / (2 * (8 * wb) ** 2)
        out[big] = np.sqrt(np.pi / (2 * wb)) * series
    return out


def _kh_continued(kernel: KernelSpec, x, y):
    """Closed-form k_h(x, y) for complex x (principal branches, |arg x| < pi)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=float)
    r = np.sqrt(x + y)
    if kernel.closed_form == "half_inverse_sqrt":
        return math.pi * np.sqrt(x) * np.exp(-2.0 * r) / r
    if kernel.closed_form == "power":
        b = kernel.beta
        with np.errstate(under="ignore"):
            return 2.0 * math.gamma(b) * np.exp(b * (np.log(x) - np.log(r)) - 2.0 * r) * _kve(b, 2.0 * r)
    raise ValidationError("analytic synthesis needs a closed-form kernel")


# Mellin rays for analytic g run at arg x = +-RAY_FRACTION * pi. k_h(x, .) is
# singular at y = -x, i.e. (1 - RAY_FRACTION) pi away from the real axis in
# v = log y; LOG_STEP keeps the trapezoid error below e^{-35} at that distance.
RAY_FRACTION = 0.97
LOG_STEP = 0.015


def _log_trapezoid(kernel: KernelSpec, f: RealFunction, x, v_hi: float):
    """integral of k_h(x, y) f(y) dy by the trapezoid rule in v = log y.

    For |x| << y << 1 the integrand is ~ x^lam y^{1-lam} per unit v, with
    lam = -kernel.lower_bound, against g(x) ~ |x|^{min(lam, 1)}. For lam < 1
    a cut at Y loses a share Y^{1-lam} independent of x. For lam >= 1 the
    cut must lie below |x|: there the integrand is ~ y k_h(x, 0) per unit v,
    so a cut at Y loses a share of order Y / |x|.
    """
    lam = -kernel.lower_bound
    v_lo = min(float(np.min(np.log(np.abs(x)))), 0.0) - 37.0
    if lam < 1.0:
        v_lo = max(v_lo, -38.0 / (1.0 - lam))
    # integer-indexed nodes: np.arange with a far-from-zero float start skews the spacing
    v = v_lo + LOG_STEP * np.arange(int(math.ceil((v_hi - v_lo) / LOG_STEP)) + 1)
    y = np.exp(v)
    weights = y * np.asarray(f(y)).real
    vals = _kh_continued(kernel, x[None, :], y[:, None])
    return LOG_STEP * (weights @ vals)


def synthesize_rhs(f: RealFunction, kernel: KernelSpec, x_grid=None, tol: float = 1e-12,
                   analytic: bool = False) -> RealFunction:
    """g(x) = integral of k_h(x, y) f(y) dy for a manufactured solution f.

    With ``analytic=False`` g is sampled on ``x_grid`` (closed-form k_h when
    available, checked against quadrature) and returned grid-backed. With
    ``analytic=True`` the closed-form k_h is continued to complex x and g is
    returned as an analytic RealFunction (sector pi), which lets its Mellin
    transform be taken along a rotated ray.
    """
    origin = -kernel.lower_bound
    decay = Decay(rate=2.0, order=0.5)

    if analytic:
        if kernel.closed_form == "generic":
            raise ValidationError("analytic synthesis needs a closed-form kernel")

        if not f.decay.exponential:
            raise ValidationError("analytic synthesis needs f with exponential decay")
        v_hi = math.log(60.0 / f.decay.rate + 10.0)

        def g(x, chunk=256):
            x = np.asarray(x, dtype=complex)
            flat = x.ravel()
            out = np.empty(flat.size, dtype=complex)
            for start in range(0, flat.size, chunk):
                out[start:start + chunk] = _log_trapezoid(kernel, f, flat[start:start + chunk], v_hi)
            return out.reshape(x.shape)

        return RealFunction(g, origin, decay, sector=np.pi, name=f"K[{kernel.closed_form}]{f.name}")

    if x_grid is None:
        raise ValidationError("grid synthesis needs x_grid")
    xs = np.asarray(x_grid, dtype=float)
    if kernel.closed_form != "generic":
        # spot-check the closed form against quadrature once
        kernel_kh(kernel, float(xs[len(xs) // 2]), 1.0, 1e-9)
        vals = integrate_halfline(lambda y: kernel.kh_closed(xs[None, :], y[:, None]) * f(y)[:, None],
                                  0.0, tol, origin_exponent=f.origin_exponent, label="synthesize").value
    else:
        vals = np.array([integrate_halfline(lambda y, x=x: np.array([kernel_kh(kernel, x, yy) for yy in y])
                                            * f(y), tol, tol,
                                            origin_exponent=f.origin_exponent).value for x in xs])
    return GridFunction(xs, np.real_if_close(vals), origin, decay, name=f"K[{kernel.closed_form}]{f.name}")


class _MellinOnLine:
    """(Mg)(z) with per-point error estimates, cached along one contour."""

    def __init__(self, g: RealFunction, tol: float, lower: float):
        self.g = g
        self.tol = tol
        self.grid = isinstance(g, GridFunction) or g.sector <= 0
        self.rays = {}
        self.lower = lower

    def _ray(self, sign):
        if sign not in self.rays:
            lam0 = self.g.origin_exponent
            u_min = -min(150.0, 40.0 / max(lam0 + self.lower, 1e-3))
            self.rays[sign] = RayMellin(self.g, lam0, sign * RAY_FRACTION * self.g.sector, None, u_min)
        return self.rays[sign]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex).ravel()
        if self.grid:
            vals, errs = mellin_many(self.g, z, self.tol)
            return vals, errs + self._noise(z) + self.noise_floor(z)
        vals = np.empty(z.size, dtype=complex)
        errs = np.empty(z.size)
        for sign in (1.0, -1.0):
            mask = z.imag >= 0 if sign > 0 else z.imag < 0
            if np.any(mask):
                vals[mask], errs[mask] = self._ray(sign)(z[mask], self.tol)
        return vals, errs + self.noise_floor(z)

    def noise_floor(self, z):
        """Rounding floor of the transform: eps times the L1 mass of the integrand.

        On a ray at angle theta the result is smaller than that mass by
        e^{-theta |Im z|}, so relative accuracy is lost as |Im z| grows.
        """
        z = np.asarray(z, dtype=complex).ravel()
        if self.grid:
            x = self.g.x
            w = np.gradient(np.log(x))
            mass = np.abs(self.g.values)[None, :] * x[None, :] ** z.real[:, None] * w[None, :]
            return ROUNDING * mass.sum(axis=1)
        u, vals = self._ray(1.0).samples(0.1)
        mass = 0.1 * (np.abs(vals)[None, :] * np.exp(np.outer(z.real, u))).sum(axis=1)
        return ROUNDING * mass * np.exp(-RAY_FRACTION * self.g.sector * np.abs(z.imag))

    def _noise(self, z):
        """Bound on |M[delta g](z)| from the grid's declared sample errors."""
        err = getattr(self.g, "err", None)
        if err is None:
            return 0.0
        x = self.g.x
        w = np.gradient(np.log(x))
        return np.sum(err[None, :] * x[None, :] ** z.real[:, None] * w[None, :], axis=1)


def _fit_envelope(logq, gamma_: float) -> ImageEnvelope:
    """Power-law fit of |Q(gamma + i tau)| e^{pi tau/2} at large tau."""
    r = logq.real + HALF_PI * ENVELOPE_TAUS
    slope = np.polyfit(np.log(ENVELOPE_TAUS), r, 1)[0]
    return ImageEnvelope(None, float(slope) - gamma_ + 0.05, HALF_PI)


def _check_zero_guard(config: SolveConfig):
    taus = np.linspace(0.0, GUARD_HEIGHT, 601)
    log_fh = config.kernel.log_Fh(config.gamma + 1j * taus) if config.kernel.log_Fh is not None \
        else np.log(config.kernel.image(config.gamma + 1j * taus))
    scaled = np.exp(log_fh.real + HALF_PI * taus)
    if np.any(scaled < config.zero_guard):
        i = int(np.argmin(scaled))
        raise KernelZeroOnContour(
            f"solver: |Fh| below zero_guard on contour at tau = {taus[i]:.3g} ({scaled[i]:.2e})")


def quotient_image(g: RealFunction, config: SolveConfig):
    """(Mg)(z) / (Fh)(z) as a TransformImage, plus the Mellin error evaluator."""
    kernel = config.kernel
    mg = _MellinOnLine(g, 0.1 * config.tol, config.gamma)
    log_fh = kernel.log_Fh if kernel.log_Fh is not None else (lambda z: np.log(kernel.image(z)))

    def q(z):
        z = np.asarray(z, dtype=complex)
        vals, _ = mg(z)
        return (vals * np.exp(-log_fh(z.ravel()))).reshape(z.shape)

    def q_err(z):
        z = np.asarray(z, dtype=complex).ravel()
        _, errs = mg(z)
        return errs * np.exp(-log_fh(z).real)

    def q_floor(z):
        z = np.asarray(z, dtype=complex).ravel()
        return mg.noise_floor(z) * np.exp(-log_fh(z).real)

    q.err = q_err
    q.floor = q_floor
    return q, q_err


def trusted_height(q_floor, gamma_: float, ts, tol: float, cap: float = 400.0) -> float:
    """Largest contour height at which the rounding floor of the quotient still
    contributes less than ``tol`` to f once multiplied by the inversion kernel."""
    taus = np.arange(1.0, cap + 1.0)
    z = gamma_ + 1j * taus
    floor = np.maximum(q_floor(z), 1e-300)
    kern = np.abs(ikernel(-(1.0 + z[:, None]), np.array([ts.min(), ts.max()])[None, :],
                          np.log(floor)[:, None] + 0j)).max(axis=1)
    bad = np.nonzero(np.cumsum(kern) / np.pi > 0.1 * tol)[0]
    return float(taus[bad[0]]) if bad.size else cap


def solve(g: RealFunction, config: SolveConfig, t_grid, full_output: bool = False):
    """Solve integral of k_h(x, y) f(y) dy = g(x) for f on ``t_grid``.

    f(t) = (1/2 pi i) * integral of I_{-(1+z)}(2 sqrt t) t^{-(1+z)/2} (Mg)(z) / (Fh)(z) dz
    along Re z = config.gamma.

    Returns a GridFunction whose ``err`` holds per-point error estimates
    (contour discretization plus propagated Mellin error of g).

    Raises
    ------
    KernelZeroOnContour
        If |Fh| e^{pi|tau|/2} drops below ``zero_guard`` on the contour.
    EnvelopeTooWeak
        If the quotient does not decay fast enough for the inversion integral.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or np.any(ts <= 0):
        raise ValidationError("t_grid must be a non-empty list of positive reals")
    _check_zero_guard(config)
    q, q_err = quotient_image(g, config)
    probes = q(config.gamma + 1j * ENVELOPE_TAUS)
    if np.all(probes == 0):
        zero = GridFunction(np.sort(ts), np.zeros(ts.size), name="f", err=np.zeros(ts.size)) \
            if ts.size >= 4 else None
        return zero if not full_output else (zero, {"converged": True})
    rel_err = q_err(config.gamma + 1j * ENVELOPE_TAUS) / np.abs(probes)
    if np.any(rel_err > 0.1):
        raise EnvelopeTooWeak(
            "solver: Mellin transform of g is unresolved on the contour "
            f"(relative error {np.max(rel_err):.1e} at tau <= {ENVELOPE_TAUS[-1]:g}); "
            "the data cannot support the inversion")
    with np.errstate(divide="ignore"):
        envelope = _fit_envelope(np.log(probes + 0j), config.gamma)
    image = TransformImage(q, config.alpha, envelope, name="Mg/Fh")
    height = max(trusted_height(q.floor, config.gamma, ts, config.tol), MIN_HEIGHT)
    spec = ContourSpec(gamma=config.gamma, tol=config.tol, rtol=config.tol,
                       poles=(config.alpha, config.kernel.lower_bound), taper=True,
                       max_height=height)
    try:
        res = invert(image, ts, spec, tol=config.tol, full_output=True)
    except NonConvergence as exc:
        if exc.result is None:
            raise
        res = exc.result
    values = np.asarray(res.value).real
    err = np.asarray(res.err_abs, dtype=float) + _propagated(q_err, config.gamma, ts, res.info)
    converged = bool(res.converged and np.all(err <= 10 * config.tol * np.maximum(np.abs(values), 1.0)))
    order = np.argsort(ts)
    out = GridFunction(ts[order], values[order], 0.0, Decay(rate=1.0), name="f", err=err[order]) \
        if ts.size >= 4 else None
    info = {"values": values, "err": err, "converged": converged, "max_height": height, **res.info}
    if full_output:
        return out, info
    if out is None:
        raise ValidationError("solve needs at least 4 grid points to build a grid function; use full_output")
    return out


def _propagated(q_err, gamma_: float, ts, info) -> np.ndarray:
    """Error in f from the Mellin error of g, summed along the sampled contour."""
    h = float(info.get("h", 0.25))
    T = float(info.get("T", 60.0))
    taus = np.arange(0.0, T + h, h)
    z = gamma_ + 1j * taus
    dq = q_err(z)
    if not np.any(dq > 0):
        return np.zeros(ts.size)
    kern = np.abs(ikernel(-(1.0 + z[:, None]), ts[None, :], np.log(np.maximum(dq, 1e-300))[:, None] + 0j))
    kern[dq == 0] = 0.0
    return (h / np.pi) * kern.sum(axis=0)
