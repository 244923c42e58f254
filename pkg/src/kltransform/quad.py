"""Quadrature engines.

* adaptive Gauss-Kronrod (7/15) on finite intervals and on (0, inf),
  vectorized over nodes and over integrand components;
* iterated integration over the quarter-plane;
* trapezoid integration along vertical lines Re z = gamma with envelope-based
  truncation or a smooth taper for slowly decaying, oscillating tails.

Integrands take a 1-D array of nodes and return an array whose first axis
matches the nodes; any trailing axes are treated as independent components
integrated simultaneously on a shared subdivision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .errors import EnvelopeViolation, NonConvergence, PoleOnContour, SingularIntegrand

__all__ = [
    "QuadResult",
    "Envelope",
    "ContourSpec",
    "integrate_finite",
    "integrate_halfline",
    "integrate_quarterplane",
    "integrate_contour",
    "taper_window",
]

_EPS = np.finfo(float).eps

# Gauss-Kronrod 15-point nodes on [-1, 1] (non-negative half) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
# Gauss nodes sit at odd positions of the Kronrod set
_WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass
class QuadResult:
    """Integral estimate.

    ``value`` and ``err_abs`` are scalars for scalar integrands and arrays
    (one entry per component) otherwise.
    """

    value: complex | np.ndarray
    err_abs: float | np.ndarray
    evals: int
    converged: bool
    info: dict = field(default_factory=dict)

    def __iter__(self):
        # allows ``value, err = integrate_...(...)[:2]`` style unpacking
        return iter((self.value, self.err_abs, self.evals, self.converged))


def _finalize(value, err, evals, converged, info=None):
    value = np.asarray(value)
    err = np.asarray(err, dtype=float)
    if value.ndim == 0:
        value = complex(value)
        err = float(err)
    return QuadResult(value, err, evals, converged, info or {})


def _gk_adaptive(f, a, b, atol, rtol, max_depth=40, max_evals=2_000_000,
                 breakpoints: Sequence[float] = (), label="integrand"):
    """Vector-valued adaptive GK15 on [a, b] with batch bisection."""
    edges = np.unique(np.concatenate([[a, b], [p for p in breakpoints if a < p < b]]))
    lo_all, hi_all = edges[:-1], edges[1:]
    depth_all = np.zeros(lo_all.size, dtype=int)
    comp_shape = None
    evals = 0

    def evaluate(lo, hi):
        nonlocal comp_shape, evals
        centre = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = (centre[:, None] + half[:, None] * _NODES[None, :]).ravel()
        fx = np.asarray(f(x))
        evals += x.size
        if comp_shape is None:
            comp_shape = fx.shape[1:]
        fx = fx.reshape((lo.size, 15) + comp_shape)
        if not np.all(np.isfinite(fx)):
            bad = x[np.nonzero(~np.isfinite(fx.reshape(x.size, -1)).all(axis=1))[0][0]]
            raise SingularIntegrand(f"{label}: non-finite value at node {bad!r}")
        hshape = (lo.size,) + (1,) * len(comp_shape)
        hw = half.reshape(hshape)
        res_k = np.tensordot(_WK, fx, axes=([0], [1])) * hw
        res_g = np.tensordot(_WG15, fx, axes=([0], [1])) * hw
        mean = res_k / (2.0 * hw)
        res_abs = np.tensordot(_WK, np.abs(fx), axes=([0], [1])) * np.abs(hw)
        res_asc = np.tensordot(_WK, np.abs(fx - mean[:, None]), axes=([0], [1])) * np.abs(hw)
        err = np.abs(res_k - res_g)
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = res_asc * np.minimum(1.0, (200.0 * err / res_asc) ** 1.5)
        err = np.where((res_asc != 0) & (err != 0), scaled, err)
        err = np.maximum(err, 50.0 * _EPS * res_abs)
        return res_k, err

    res, err = evaluate(lo_all, hi_all)
    while True:
        total = res.sum(axis=0)
        total_err = err.sum(axis=0)
        tol_c = np.maximum(atol, rtol * np.abs(total))
        if np.all(total_err <= tol_c):
            return total, total_err, evals, True
        # normalized per-interval error score
        axes = tuple(range(1, err.ndim))
        score = np.max(err / np.where(tol_c > 0, tol_c, np.inf), axis=axes) if axes else err / tol_c
        order = np.argsort(score)[::-1]
        csum = np.cumsum(score[order])
        remaining = score.sum() - csum
        n_split = int(np.searchsorted(-remaining, -0.5) + 1)
        chosen = order[:max(n_split, 1)]
        chosen = chosen[depth_all[chosen] < max_depth]
        if chosen.size == 0 or evals > max_evals:
            return total, total_err, evals, False
        keep = np.ones(lo_all.size, dtype=bool)
        keep[chosen] = False
        mid = 0.5 * (lo_all[chosen] + hi_all[chosen])
        new_lo = np.concatenate([lo_all[chosen], mid])
        new_hi = np.concatenate([mid, hi_all[chosen]])
        new_depth = np.concatenate([depth_all[chosen], depth_all[chosen]]) + 1
        r_new, e_new = evaluate(new_lo, new_hi)
        lo_all = np.concatenate([lo_all[keep], new_lo])
        hi_all = np.concatenate([hi_all[keep], new_hi])
        depth_all = np.concatenate([depth_all[keep], new_depth])
        res = np.concatenate([res[keep], r_new])
        err = np.concatenate([err[keep], e_new])


def integrate_finite(f: Callable, a: float, b: float, tol: float = 1e-10, rtol: float = 1e-10,
                     strict: bool = True, breakpoints: Sequence[float] = (),
                     max_depth: int = 40) -> QuadResult:
    """Adaptive GK15 on the finite interval [a, b]."""
    val, err, evals, ok = _gk_adaptive(f, a, b, tol, rtol, max_depth=max_depth,
                                       breakpoints=breakpoints)
    res = _finalize(val, err, evals, ok)
    if strict and not ok:
        raise NonConvergence(f"integrate_finite: error {np.max(err):.2e} above tolerance", res)
    return res


def _origin_power(origin_exponent: float) -> int:
    if origin_exponent <= -1.0:
        raise ValueError(f"origin exponent {origin_exponent} is not integrable at 0")
    if origin_exponent >= 1.0:
        return 1
    return int(min(20, max(1, math.ceil(2.0 / (1.0 + origin_exponent)))))


def _tail_power(tail_exponent: Optional[float]) -> int:
    if tail_exponent is None:
        return 1
    if tail_exponent >= -1.0:
        raise ValueError(f"tail exponent {tail_exponent} is not integrable at infinity")
    return int(min(20, max(1, math.ceil(2.0 / (-1.0 - tail_exponent)))))


def integrate_halfline(f: Callable, tol: float = 1e-10, rtol: float = 1e-10, *,
                       origin_exponent: float = 0.0, tail_exponent: Optional[float] = None,
                       split: float = 1.0, strict: bool = True, max_depth: int = 40,
                       label: str = "integrand") -> QuadResult:
    """Integrate ``f`` over (0, inf).

    The half-line is split at ``split``. On (0, split) the substitution
    x = split * t**m smooths an algebraic singularity x**origin_exponent; on
    (split, inf) the map x = split * t**(-m) sends infinity to 0 (m = 1 for
    exponential decay, larger for a declared power tail x**tail_exponent).

    Parameters
    ----------
    f : callable
        Vectorized integrand.
    tol, rtol : float
        Absolute and relative tolerances; converged means
        ``err_abs <= max(tol, rtol*|value|)``.
    origin_exponent : float
        f(x) = O(x**origin_exponent) as x -> 0, must exceed -1.
    tail_exponent : float, optional
        Power-law decay at infinity; None means exponential decay.
    """
    m0 = _origin_power(origin_exponent)
    m1 = _tail_power(tail_exponent)

    def mapped(u):
        u = np.asarray(u, dtype=float)
        low = u < 1.0
        t = np.where(low, u, 2.0 - u)
        with np.errstate(over="ignore", divide="ignore", under="ignore"):
            x = np.where(low, split * t ** m0, split * t ** (-m1))
            jac = np.where(low, split * m0 * t ** (m0 - 1), split * m1 * t ** (-m1 - 1))
        finite = np.isfinite(x) & (x > 0) & np.isfinite(jac) & (x < 1e300)
        xs = np.where(finite, x, split)
        fx = np.asarray(f(xs))
        jshape = (u.size,) + (1,) * (fx.ndim - 1)
        out = fx * jac.reshape(jshape)
        out[~finite] = 0.0
        return out

    val, err, evals, ok = _gk_adaptive(mapped, 0.0, 2.0, tol, rtol, max_depth=max_depth,
                                       breakpoints=(1.0,), label=label)
    res = _finalize(val, err, evals, ok)
    if strict and not ok:
        raise NonConvergence(f"integrate_halfline({label}): error {np.max(err):.2e} above tolerance", res)
    return res


def integrate_quarterplane(f2: Callable, tol: float = 1e-10, rtol: float = 1e-10, *,
                           origin_exponents=(0.0, 0.0), tail_exponents=(None, None),
                           splits=(1.0, 1.0), strict: bool = True) -> QuadResult:
    """Iterated integral of ``f2(u, v)`` over (0, inf)^2.

    ``f2`` is called with broadcastable arrays ``u[None, :]`` and ``v[:, None]``
    and must return shape ``(len(v), len(u), *components)``. The inner
    v-integral is carried out for a whole batch of outer nodes at once.
    """
    inner_evals = [0]
    inner_tol = 0.25 * tol
    inner_rtol = 0.25 * rtol

    def outer(u):
        u = np.asarray(u, dtype=float)

        def inner(v):
            vals = np.asarray(f2(u[None, :], np.asarray(v)[:, None]))
            return vals  # (n_v, n_u, *comp)

        try:
            res = integrate_halfline(inner, inner_tol, inner_rtol,
                                     origin_exponent=origin_exponents[1],
                                     tail_exponent=tail_exponents[1], split=splits[1],
                                     label="inner level")
        except NonConvergence as exc:
            raise NonConvergence(f"quarterplane inner level: {exc}", exc.result) from exc
        inner_evals[0] += res.evals
        return np.asarray(res.value)

    try:
        res = integrate_halfline(outer, 0.5 * tol, 0.5 * rtol,
                                 origin_exponent=origin_exponents[0],
                                 tail_exponent=tail_exponents[0], split=splits[0],
                                 label="outer level")
    except NonConvergence as exc:
        raise NonConvergence(f"quarterplane outer level: {exc}", exc.result) from exc
    # every inner integral met max(inner_tol, inner_rtol * |I(u)|); the relative
    # part integrates to inner_rtol times the outer magnitude
    err = np.asarray(res.err_abs) + inner_rtol * np.abs(np.asarray(res.value))
    ok = bool(np.all(err <= np.maximum(tol, rtol * np.abs(np.asarray(res.value)))))
    return _finalize(res.value, err, res.evals + inner_evals[0], ok)


# ---------------------------------------------------------------------------
# vertical contours
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Envelope:
    """Decay descriptor |F(c + i tau)| <= C |tau|^p exp(-a |tau|) for |tau| >= 1."""

    C: float
    p: float
    a: float

    def bound(self, tau):
        tau = np.maximum(np.abs(np.asarray(tau, dtype=float)), 1.0)
        return self.C * tau ** self.p * np.exp(-self.a * tau)

    @property
    def integrable(self) -> bool:
        return self.a > 0 or self.p < -1

    def tail(self, T: float) -> float:
        """Upper bound for the one-sided tail integral from T to infinity."""
        T = max(float(T), 1.0)
        C, p, a = self.C, self.p, self.a
        if a > 0:
            if p > -1:
                return float(C * a ** (-p - 1) * special.gammaincc(p + 1, a * T) * special.gamma(p + 1))
            return float(C * T ** p * np.exp(-a * T) / a)
        if p < -1:
            return float(C * T ** (p + 1) / (-p - 1))
        return math.inf

    def height_for(self, target: float, cap: float = math.inf) -> float:
        """Smallest T (up to ``cap``) whose two-sided tail is below ``target``."""
        if not self.integrable:
            return math.inf
        T = 1.0
        while 2.0 * self.tail(T) > target:
            T *= 2.0
            if T > cap:
                return math.inf
        lo, hi = T / 2.0, T
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if 2.0 * self.tail(mid) > target:
                lo = mid
            else:
                hi = mid
        return max(hi, 1.0)

    def scaled(self, factor: float) -> "Envelope":
        return Envelope(self.C * factor, self.p, self.a)


@dataclass(frozen=True)
class ContourSpec:
    """Vertical contour Re z = gamma with truncation and step policy.

    Attributes
    ----------
    gamma : float
        Abscissa of the line.
    truncation : float, optional
        Height T. With a sharp cut the integral runs over |tau| <= T; with a
        taper the window falls from 1 at T/2 to 0 at T. If omitted it is
        derived from the envelope (sharp) or found adaptively (taper).
    step : float, optional
        Fixed trapezoid step; selects the deterministic fixed_step policy.
    tol, rtol : float
        Adaptive policy tolerances (absolute, relative).
    poles : sequence of complex
        Poles of the integrand; the line must stay clear of them.
    taper : bool, optional
        Force (True) or forbid (False) the smooth taper.
    max_height : float
        Largest admissible T.
    """

    gamma: float
    truncation: Optional[float] = None
    step: Optional[float] = None
    tol: float = 1e-10
    rtol: float = 1e-10
    poles: tuple = ()
    taper: Optional[bool] = None
    max_height: float = 400.0
    taper_start: float = 0.25

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        if self.truncation is not None and not self.truncation > 0:
            raise ValueError("truncation height must be positive")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.step is None and not self.tol > 0:
            raise ValueError("adaptive policy needs tol > 0")
        for p in self.poles:
            if abs(complex(p).real - self.gamma) < 1e-9:
                raise PoleOnContour(f"contour Re z = {self.gamma} passes through pole {p}")

    @property
    def policy(self) -> str:
        return "fixed_step" if self.step is not None else "adaptive"

    @property
    def pole_distance(self) -> float:
        if not self.poles:
            return math.inf
        return min(abs(complex(p).real - self.gamma) for p in self.poles)

    def with_gamma(self, gamma: float) -> "ContourSpec":
        return replace(self, gamma=gamma)


def taper_window(tau, t_start: float, t_end: float):
    """C-infinity window: 1 for |tau| <= t_start, 0 for |tau| >= t_end."""
    u = (np.abs(np.asarray(tau, dtype=float)) - t_start) / (t_end - t_start)
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
        w = b / (a + b)
    return np.where(u <= 0, 1.0, np.where(u >= 1, 0.0, w))


class _LineSampler:
    """Memoized evaluation of F(gamma + i tau) at trapezoid nodes."""

    def __init__(self, F, gamma, envelope, check):
        self.F = F
        self.gamma = gamma
        self.envelope = envelope
        self.check = check and envelope is not None
        self.cache: dict = {}
        self.comp_shape = None
        self.evals = 0

    def __call__(self, taus: np.ndarray) -> np.ndarray:
        keys = taus.tolist()
        missing = [t for t in keys if t not in self.cache]
        if missing:
            tm = np.array(missing)
            vals = np.asarray(self.F(self.gamma + 1j * tm), dtype=complex)
            if vals.ndim == 0 or vals.shape[0] != tm.size:
                vals = np.broadcast_to(vals, (tm.size,) + vals.shape[1:] if vals.ndim else (tm.size,))
            self.evals += tm.size
            if self.comp_shape is None:
                self.comp_shape = vals.shape[1:]
            if not np.all(np.isfinite(vals)):
                raise SingularIntegrand("contour integrand returned a non-finite value")
            if self.check:
                big = np.abs(tm) >= 1.0
                if np.any(big):
                    mag = np.abs(vals[big]).reshape(int(big.sum()), -1).max(axis=1)
                    limit = 10.0 * self.envelope.bound(tm[big])
                    if np.any(mag > limit):
                        i = int(np.argmax(mag / limit))
                        raise EnvelopeViolation(
                            f"|F| = {mag[i]:.3e} exceeds 10x envelope {limit[i] / 10:.3e} "
                            f"at tau = {tm[big][i]:.4g}")
            for t, v in zip(missing, vals):
                self.cache[t] = v
        return np.stack([self.cache[t] for t in keys])


def integrate_contour(F: Callable, spec: ContourSpec, envelope: Optional[Envelope] = None,
                      symmetric: bool = False, check_envelope: bool = True,
                      strict: bool = True) -> QuadResult:
    """(1/2 pi i) * integral of F along Re z = spec.gamma.

    Parameters
    ----------
    F : callable
        Vectorized in z; may return trailing component axes.
    spec : ContourSpec
        Line, truncation and step policy.
    envelope : Envelope, optional
        Decay of |F| on the line. Exponential or integrable power decay gives
        a sharp cut with an analytic tail bound; otherwise the smooth taper is
        used and its error is estimated by doubling the window.
    symmetric : bool
        Declare F(gamma - i tau) = conj F(gamma + i tau); only tau >= 0 is
        sampled and the real part is returned.
    check_envelope : bool
        Raise EnvelopeViolation when samples exceed 10x the envelope.
    """
    sampler = _LineSampler(F, spec.gamma, envelope, check_envelope)
    cap = spec.max_height

    def trap(h, T, taper):
        k_max = int(math.ceil(T / h - 1e-9))
        k = np.arange(0 if symmetric else -k_max, k_max + 1)
        taus = k * h
        vals = sampler(taus)
        if taper:
            w = taper_window(taus, spec.taper_start * T, T)
        else:
            w = np.ones(taus.size)
            w[np.abs(k) == k_max] = 0.5
        if symmetric:
            w = w.copy()
            w[0] *= 0.5
            s = np.tensordot(w, vals, axes=([0], [0]))
            return (h / np.pi) * s.real + 0j
        s = np.tensordot(w, vals, axes=([0], [0]))
        return (h / (2.0 * np.pi)) * s

    # truncation mode
    tail = 0.0
    if spec.taper is not None:
        taper = spec.taper
    elif envelope is not None and envelope.integrable:
        taper = False
    else:
        taper = True
    T_fixed = spec.truncation
    if not taper and T_fixed is None:
        if envelope is None:
            raise ValueError("sharp truncation needs an envelope or an explicit height")
        T_fixed = envelope.height_for(0.5 * spec.tol, cap)
        if not np.isfinite(T_fixed):
            taper = True
    if not taper:
        T_fixed = min(T_fixed, cap)
        tail = 2.0 * envelope.tail(T_fixed) / (2.0 * np.pi) if envelope is not None else 0.0
        if spec.policy == "fixed_step" and spec.taper is None and np.any(tail > spec.tol):
            # the analytic tail bound cannot certify this cut; estimate by halving the window
            taper, tail = True, 0.0

    h0 = spec.step if spec.step is not None else min(0.25, 0.25 * spec.pole_distance)

    if spec.policy == "fixed_step":
        h = h0
        if taper:
            T = T_fixed if T_fixed is not None and np.isfinite(T_fixed) else spec.truncation or 40.0
            s_fine = trap(h, T, True)
            s_coarse = trap(2 * h, T, True)
            s_short = trap(h, T / 2, True)
            err = np.abs(s_fine - s_coarse) + np.abs(s_fine - s_short)
        else:
            s_fine = trap(h, T_fixed, False)
            s_coarse = trap(2 * h, T_fixed, False)
            err = np.abs(s_fine - s_coarse) + tail
        ok = bool(np.all(err <= np.maximum(spec.tol, spec.rtol * np.abs(s_fine))))
        res = _finalize(s_fine, err, sampler.evals, ok, {"h": h, "taper": taper})
        if strict and not ok:
            raise NonConvergence(f"integrate_contour: fixed-step error {np.max(err):.2e}", res)
        return res

    h_min = 1e-4
    state = {"h": h0}

    def converge_step(T, tol_target):
        h = state["h"]
        while True:
            s_fine = trap(h, T, taper)
            s_coarse = trap(2 * h, T, taper)
            diff = np.abs(s_fine - s_coarse)
            target = np.maximum(tol_target, spec.rtol * np.abs(s_fine))
            if np.all(diff <= 0.25 * target) or h / 2 < h_min:
                state["h"] = h
                return s_fine, diff, bool(np.all(diff <= 0.25 * target))
            h /= 2.0

    if not taper:
        s, diff, ok = converge_step(T_fixed, spec.tol)
        err = diff + tail
        ok = ok and bool(np.all(err <= np.maximum(spec.tol, spec.rtol * np.abs(s))))
        res = _finalize(s, err, sampler.evals, ok, {"h": state["h"], "T": T_fixed, "taper": False})
    else:
        T = spec.truncation if spec.truncation is not None else 16.0
        T = min(T, cap)
        s_prev, diff_prev, _ = converge_step(T, spec.tol)
        ok = False
        err = np.full(np.shape(s_prev), np.inf)
        while True:
            if 2 * T > cap:
                break
            T *= 2.0
            s, diff, step_ok = converge_step(T, spec.tol)
            err = np.abs(s - s_prev) + diff
            target = np.maximum(spec.tol, spec.rtol * np.abs(s))
            s_prev = s
            if np.all(err <= 0.5 * target) and step_ok:
                ok = True
                break
        res = _finalize(s_prev, err, sampler.evals, ok, {"h": state["h"], "T": T, "taper": True})
    if strict and not res.converged:
        raise NonConvergence(f"integrate_contour: error {np.max(res.err_abs):.2e} above tolerance", res)
    return res
