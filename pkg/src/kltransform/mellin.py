"""Functions on the half-line and on vertical lines, and the Mellin/Laplace
machinery that moves between them."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DivergentNorm, StripViolation, ValidationError
from .quad import ContourSpec, Envelope, integrate_contour, integrate_halfline

__all__ = [
    "Decay",
    "RealFunction",
    "GridFunction",
    "LineFunction",
    "read_grid_csv",
    "write_grid_csv",
    "inverse_mellin",
    "mellin_forward",
    "mellin_many",
    "RayMellin",
    "laplace",
    "space_norm",
]

STRIP_MARGIN = 1e-3


@dataclass(frozen=True)
class Decay:
    """Behaviour at infinity: f(x) = O(x**power * exp(-rate * x**order))."""

    rate: float = 0.0
    order: float = 1.0
    power: float = 0.0

    @property
    def exponential(self) -> bool:
        return self.rate > 0

    def bound(self, x):
        x = np.asarray(x, dtype=float)
        return x ** self.power * np.exp(-self.rate * x ** self.order)


@dataclass(frozen=True)
class RealFunction:
    """A function on (0, inf) with the metadata the quadratures rely on.

    Attributes
    ----------
    func : callable
        Vectorized evaluator. If ``sector > 0`` it must also accept complex
        x with |arg x| < sector (analytic continuation).
    origin_exponent : float
        f(x) = O(x**origin_exponent) as x -> 0.
    decay : Decay
        Behaviour as x -> infinity.
    sector : float
        Half-angle of a sector around the positive axis in which f is
        analytic and keeps its decay; 0 for data known only on the axis.
    derivatives : sequence of callables
        Optional f', f'', ... for the operational identities.
    alpha : float, optional
        Weight exponent declaring membership in L1(2 x^{alpha/2} K_alpha(2 sqrt x) dx).
    """

    func: Callable
    origin_exponent: float = 0.0
    decay: Decay = field(default_factory=lambda: Decay(rate=1.0))
    sector: float = 0.0
    derivatives: tuple = ()
    alpha: Optional[float] = None
    name: str = "f"

    def __call__(self, x):
        x = np.asarray(x)
        return np.asarray(self.func(x), dtype=complex) * np.ones(x.shape)

    def derivative(self, m: int) -> Callable:
        if m == 0:
            return self.func
        if m > len(self.derivatives):
            raise ValidationError(f"{self.name}: derivative of order {m} not supplied")
        return self.derivatives[m - 1]

    def envelope(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 1.0, x ** self.origin_exponent, self.decay.bound(x) / self.decay.bound(1.0))

    def check_metadata(self, probes: Optional[np.ndarray] = None, factor: float = 10.0) -> bool:
        """True if |f| / envelope stays within ``factor`` of its value at x = 1."""
        if probes is None:
            probes = np.logspace(-4, 1.5, 10)
        vals = np.abs(self(probes))
        ref = abs(complex(self(np.array([1.0]))[0]))
        if ref == 0:
            return bool(np.all(vals == 0))
        ratio = vals / (ref * self.envelope(probes))
        return bool(np.all(ratio <= factor))

    def scaled(self, factor: complex) -> "RealFunction":
        func = self.func
        derivs = tuple((lambda d: (lambda x: factor * d(x)))(d) for d in self.derivatives)
        return RealFunction(lambda x: factor * func(x), self.origin_exponent, self.decay,
                            self.sector, derivs, self.alpha, self.name)


class GridFunction(RealFunction):
    """Grid-backed RealFunction.

    Monotone cubic interpolation in (log x, f) inside the grid; outside it the
    samples are continued by the declared power law at 0 and the decay
    descriptor at infinity. Immutable after construction.
    """

    def __init__(self, x, values, origin_exponent: float = 0.0, decay: Decay = Decay(rate=1.0),
                 name: str = "grid", err=None):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values)
        if x.ndim != 1 or x.size < 4 or x.size != values.size:
            raise ValidationError("grid needs at least 4 matching (x, f) samples")
        if np.any(x <= 0) or np.any(np.diff(x) <= 0):
            raise ValidationError("grid x must be positive and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValidationError("grid values must be finite")
        self._x = x
        self._values = values.astype(complex)
        self._logx = np.log(x)
        self._err = None if err is None else np.asarray(err, dtype=float)
        re = PchipInterpolator(self._logx, self._values.real)
        im = PchipInterpolator(self._logx, self._values.imag)
        x0, x1 = x[0], x[-1]
        v0, v1 = self._values[0], self._values[-1]

        def func(xq):
            xq = np.asarray(xq, dtype=float)
            out = np.empty(xq.shape, dtype=complex)
            lo, hi = xq < x0, xq > x1
            mid = ~(lo | hi)
            lx = np.log(xq[mid])
            out[mid] = re(lx) + 1j * im(lx)
            out[lo] = v0 * (xq[lo] / x0) ** origin_exponent
            with np.errstate(under="ignore"):
                out[hi] = v1 * decay.bound(xq[hi]) / decay.bound(x1)
            return out

        object.__setattr__(self, "func", func)
        object.__setattr__(self, "origin_exponent", origin_exponent)
        object.__setattr__(self, "decay", decay)
        object.__setattr__(self, "sector", 0.0)
        object.__setattr__(self, "derivatives", ())
        object.__setattr__(self, "alpha", None)
        object.__setattr__(self, "name", name)

    # frozen dataclass machinery is bypassed on purpose; keep hashing by identity
    __hash__ = object.__hash__

    def __eq__(self, other):
        return self is other

    @property
    def x(self) -> np.ndarray:
        return self._x.copy()

    @property
    def values(self) -> np.ndarray:
        return self._values.copy()

    @property
    def err(self):
        return None if self._err is None else self._err.copy()

    def log_uniform(self, rtol: float = 1e-9) -> bool:
        d = np.diff(self._logx)
        return bool(np.all(np.abs(d - d.mean()) <= rtol * abs(d.mean())))


def read_grid_csv(path, origin_exponent: float = 0.0, decay: Decay = Decay(rate=1.0)) -> GridFunction:
    """Read a grid CSV with header ``x,f``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "f"]:
            raise ValidationError(f"{path}: header must be 'x,f'")
        xs, fs = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 2 columns")
            try:
                xs.append(float(row[0]))
                fs.append(float(row[1]))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return GridFunction(np.array(xs), np.array(fs), origin_exponent, decay, name=str(path))


def write_grid_csv(path, x, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "f"])
        for xi, fi in zip(np.asarray(x), np.asarray(values)):
            w.writerow([repr(float(xi)), repr(float(np.real(fi)))])


@dataclass(frozen=True)
class LineFunction:
    """Analytic function on the line Re s = c0 with a decay envelope.

    ``func`` must be vectorized in complex s. ``real_valued`` declares the
    conjugate symmetry F(conj s) = conj F(s) (the represented function is
    real), which halves contour work.
    """

    c0: float
    func: Callable
    envelope: Envelope
    real_valued: bool = True
    poles: tuple = ()
    name: str = "F"

    def __post_init__(self):
        env = self.envelope
        # a = 0 with -1 <= p < 0 is accepted as conditionally convergent (taper)
        if env.a < 0 or (env.a == 0 and env.p >= 0):
            raise ValidationError(f"{self.name}: envelope does not decay on the line")

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return np.asarray(self.func(s), dtype=complex) * np.ones(s.shape)

    def check_envelope(self, taus=None) -> bool:
        if taus is None:
            taus = np.array([1.0, 2.0, 5.0, 10.0, 20.0, 40.0])
        vals = np.abs(self(self.c0 + 1j * taus))
        return bool(np.all(vals <= 10.0 * self.envelope.bound(taus)))


# ---------------------------------------------------------------------------


def inverse_mellin(F: LineFunction, x, tol: float = 1e-10, spec: Optional[ContourSpec] = None):
    """(1/2 pi i) * integral of F(s) x^{-s} ds on Re s = F.c0 (vectorized in x)."""
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    xs = np.atleast_1d(x_arr)
    if np.any(xs <= 0):
        raise ValidationError("inverse_mellin needs x > 0")
    logx = np.log(xs)
    if spec is None:
        spec = ContourSpec(gamma=F.c0, tol=tol, rtol=tol, poles=F.poles)
    env = F.envelope.scaled(float(np.max(xs ** (-F.c0))))

    def integrand(s):
        return F(s)[:, None] * np.exp(-s[:, None] * logx[None, :])

    res = integrate_contour(integrand, spec, env, symmetric=F.real_valued)
    val = np.asarray(res.value)
    return complex(val[0]) if scalar else val


def _strip_check(f: RealFunction, s: np.ndarray) -> None:
    lo = -f.origin_exponent + STRIP_MARGIN
    if np.any(s.real <= lo):
        raise StripViolation(f"Re s must exceed {lo:.4g} for {f.name} (origin exponent {f.origin_exponent})")
    if not f.decay.exponential:
        hi = -f.decay.power - STRIP_MARGIN
        if np.any(s.real >= hi):
            raise StripViolation(f"Re s must be below {hi:.4g} for {f.name} (power tail {f.decay.power})")


def mellin_forward(f: RealFunction, s, tol: float = 1e-10) -> complex:
    """Mellin transform integral of f(x) x^{s-1} over (0, inf).

    Grid-backed functions use the trapezoid rule in log x on the samples;
    analytic functions with a sector of analyticity are integrated along a
    rotated ray when |Im s| is large; otherwise adaptive GK on the half-line.

    Raises
    ------
    StripViolation
        If Re s is outside the strip implied by the metadata (with margin).
    """
    s = complex(s)
    _strip_check(f, np.array([s]))
    if isinstance(f, GridFunction) or (f.sector > 0 and abs(s.imag) > 2.0):
        return complex(mellin_many(f, np.array([s]), tol)[0][0])
    tail = None if f.decay.exponential else f.decay.power + s.real - 1.0
    res = integrate_halfline(lambda x: f(x) * np.exp((s - 1.0) * np.log(x)), tol, tol,
                             origin_exponent=f.origin_exponent + s.real - 1.0,
                             tail_exponent=tail, label=f"mellin({f.name})")
    return res.value


def _geometric_tail(g_edge, lam, du):
    """du * sum_{k>=1} g_edge * exp(-lam k du) for Re lam > 0."""
    q = np.exp(-lam * du)
    return du * g_edge * q / (1.0 - q)


def _mellin_trapezoid(samples, u, s, du, lam_lo, lam_hi, chunk=400):
    """Uniform trapezoid sum over nodes ``u`` with geometric tails on both sides.

    samples : f(x(u)) * exp(i theta s)-free values, shape (n_u,)
    Returns array over s of du*sum f e^{s u} plus tails.
    """
    out = np.empty(s.size, dtype=complex)
    for start in range(0, s.size, chunk):
        sc = s[start:start + chunk]
        E = np.exp(np.outer(sc, u))
        body = du * (E @ samples)
        g0 = samples[0] * np.exp(sc * u[0])
        g1 = samples[-1] * np.exp(sc * u[-1])
        tail = 0.0
        if lam_lo is not None:
            tail = tail + _geometric_tail(g0, lam_lo + sc, du)
        if lam_hi is not None:
            tail = tail + _geometric_tail(g1, -(lam_hi + sc), du)
        out[start:start + chunk] = body + tail
    return out


def _mellin_grid(f: GridFunction, s: np.ndarray, tol: float):
    vals = f._values
    if f.log_uniform():
        u = f._logx
        samples = vals
    else:
        n = int(math.ceil((f._logx[-1] - f._logx[0]) / math.log(10) * 64)) + 1
        u = np.linspace(f._logx[0], f._logx[-1], n)
        samples = f(np.exp(u))
    du = u[1] - u[0]
    lam_hi = None
    if f.decay.exponential:
        # continue past the grid with the decay descriptor until negligible
        ext = []
        uk = u[-1]
        base = abs(samples[-1]) * np.exp(np.max(s.real) * u[-1]) if samples[-1] != 0 else 0.0
        while base > 0:
            uk += du
            v = f(np.array([np.exp(uk)]))[0]
            ext.append((uk, v))
            if abs(v) * np.exp(np.max(s.real) * uk) < 1e-20 * max(base, 1e-300) or uk > u[-1] + 50:
                break
        if ext:
            u = np.concatenate([u, [e[0] for e in ext]])
            samples = np.concatenate([samples, [e[1] for e in ext]])
    else:
        lam_hi = f.decay.power
    fine = _mellin_trapezoid(samples, u, s, du, f.origin_exponent, lam_hi)
    n = u.size - (u.size - 1) % 2
    coarse = _mellin_trapezoid(samples[:n:2], u[:n:2], s, 2 * du, f.origin_exponent, lam_hi)
    return fine, np.abs(fine - coarse)


def mellin_many(f: RealFunction, s, tol: float = 1e-10, u_min: Optional[float] = None,
                u_max: Optional[float] = None):
    """Mellin transform at many points by the trapezoid rule in u = log x.

    For analytic f with ``sector > 0`` the ray is rotated to arg x = +-0.9*sector
    (sign following Im s), which removes the exp(-|Im s| * pi/2)-type
    cancellation of the real-axis integral. Returns (values, err_estimates).
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    _strip_check(f, s)
    if isinstance(f, GridFunction):
        return _mellin_grid(f, s, tol)
    values = np.empty(s.size, dtype=complex)
    errs = np.empty(s.size)
    theta_mag = 0.9 * f.sector
    groups = [(s.imag >= 0, theta_mag), (s.imag < 0, -theta_mag)] if theta_mag > 0 else [(np.ones(s.size, bool), 0.0)]
    for mask, theta in groups:
        if not np.any(mask):
            continue
        v, e = _mellin_ray(f, s[mask], theta, tol, u_min, u_max)
        values[mask] = v
        errs[mask] = e
    return values, errs


class RayMellin:
    """Mellin transform of an analytic function along the ray arg x = theta.

    Trapezoid rule in u = log|x| on [u_min, u_max] with geometric tails;
    samples are cached per step so repeated calls (e.g. from an adaptive
    contour) only pay for the new transform points.
    """

    def __init__(self, func: Callable, origin_exponent: float, theta: float = 0.0,
                 tail_power: Optional[float] = None, u_min: float = -45.0,
                 u_max: Optional[float] = None, probe_re: float = 1.0):
        self.func = func
        self.lam0 = origin_exponent
        self.theta = theta
        self.rot = np.exp(1j * theta)
        self.lam_hi = tail_power
        self.u_min = u_min
        if u_max is None:
            probe = np.arange(0.0, 60.0, 0.25)
            mag = np.abs(np.asarray(func(np.exp(probe) * self.rot))) * np.exp(probe_re * probe)
            ref = max(float(np.max(mag)), 1e-300)
            small = np.nonzero(mag < 1e-18 * ref)[0]
            u_max = float(probe[small[0]]) if small.size else float(probe[-1])
            if tail_power is not None:
                u_max = max(u_max, 20.0)
        self.u_max = u_max
        self._cache: dict = {}

    def samples(self, du: float):
        if du not in self._cache:
            n = int(math.ceil((self.u_max - self.u_min) / du))
            u = self.u_min + du * np.arange(n + 1)
            vals = np.empty(u.size, dtype=complex)
            todo = np.ones(u.size, dtype=bool)
            if 2 * du in self._cache:
                # the coarse grid supplies every other node
                _, coarse = self._cache[2 * du]
                m = min(coarse.size, (u.size + 1) // 2)
                vals[0:2 * m:2] = coarse[:m]
                todo[0:2 * m:2] = False
            vals[todo] = np.asarray(self.func(np.exp(u[todo]) * self.rot), dtype=complex)
            self._cache[du] = (u, vals)
        return self._cache[du]

    def __call__(self, s, tol: float = 1e-10, max_halvings: int = 12):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        tau_max = float(np.max(np.abs(s.imag)))
        du = 0.1
        while du > 0.5 * np.pi / (tau_max + 10.0):
            du /= 2.0
        phase = np.exp(1j * self.theta * s)
        prev = None
        err = np.full(s.size, np.inf)
        for _ in range(max_halvings):
            u, vals = self.samples(du)
            cur = phase * _mellin_trapezoid(vals, u, s, du, self.lam0, self.lam_hi)
            if prev is not None:
                err = np.abs(cur - prev)
                if np.all(err <= tol * np.abs(cur) + 1e-3 * tol):
                    return cur, err
            prev = cur
            du /= 2.0
        return cur, err


def _mellin_ray(f, s, theta, tol, u_min, u_max):
    lam0 = f.origin_exponent
    if u_min is None:
        u_min = -min(45.0, 45.0 / max(lam0 + float(np.min(s.real)), 1e-3))
    tail = None if f.decay.exponential else f.decay.power
    ray = RayMellin(f, lam0, theta, tail, u_min, u_max, probe_re=float(np.max(s.real)))
    return ray(s, tol)


def laplace(f: RealFunction, p, tol: float = 1e-10):
    """Laplace transform integral of exp(-p t) f(t) over (0, inf).

    ``p`` may be an array (and complex with Re p > 0); all values share one
    adaptive subdivision in the scaled variable v = |p| t.
    """
    p_arr = np.asarray(p, dtype=complex)
    scalar = p_arr.ndim == 0
    ps = np.atleast_1d(p_arr).ravel()
    if np.any(ps.real <= 0):
        raise ValidationError("laplace needs Re p > 0")
    mod = np.abs(ps)
    direction = ps / mod

    def integrand(v):
        v = np.asarray(v)
        xs = v[:, None] / mod[None, :]
        return np.exp(-direction[None, :] * v[:, None]) * np.asarray(f(xs)).reshape(xs.shape)

    res = integrate_halfline(integrand, tol * 1e-3, tol, origin_exponent=max(f.origin_exponent, -0.99),
                             label=f"laplace({f.name})")
    val = np.asarray(res.value) / mod
    return complex(val[0]) if scalar else val.reshape(p_arr.shape)


def space_norm(F: LineFunction, c1: float = 0.0, c2: float = 0.0, tol: float = 1e-10) -> float:
    """(1/2 pi) * integral of exp(pi c1 |s|) |s^{c2} F(s)| along Re s = c0.

    Raises
    ------
    DivergentNorm
        Unless the envelope certifies finiteness: a > pi*c1, or a = pi*c1 with
        p + c2 < -1.
    """
    env = F.envelope
    a_eff = env.a - np.pi * c1
    if a_eff < 0 or (a_eff == 0 and env.p + c2 >= -1):
        raise DivergentNorm(
            f"envelope (p={env.p}, a={env.a}) does not make the norm with c1={c1}, c2={c2} finite")
    tail = None if a_eff > 0 else env.p + c2

    def dens(t):
        s = F.c0 + 1j * t
        return np.exp(np.pi * c1 * np.abs(s)) * np.abs(s) ** c2 * np.abs(F(s))

    total = 0.0
    for sign in (1.0, -1.0):
        if sign < 0 and F.real_valued:
            total *= 2.0
            break
        res = integrate_halfline(lambda t: dens(sign * t), tol, tol, tail_exponent=tail,
                                 label="space_norm")
        total += res.value.real
    return total / (2.0 * np.pi)
