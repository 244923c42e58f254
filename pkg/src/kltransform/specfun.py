"""Complex gamma and modified Bessel functions of complex order.

Every public function accepts scalars or arrays (broadcast together) and
returns a Python ``complex`` for scalar input, an ``ndarray`` otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, PoleProximity, SeriesNonConvergence

__all__ = [
    "GammaEval",
    "gamma",
    "gamma_eval",
    "log_gamma",
    "rgamma",
    "besselk",
    "kl_kernel",
    "besseli",
    "ikernel",
]

POLE_DISTANCE = 1e-9

_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _out(value, scalar):
    if scalar:
        return complex(value.reshape(()))
    return value


def _complex_array(w):
    arr = np.asarray(w, dtype=complex)
    return arr, arr.ndim == 0


def _check_poles(w: np.ndarray) -> None:
    near = (w.real < 0.5) & (np.abs(w - np.round(w.real)) < POLE_DISTANCE)
    if np.any(near):
        bad = w[near].ravel()[0]
        raise PoleProximity(f"gamma argument {bad} is within {POLE_DISTANCE} of a pole")


def _lanczos_sum(z: np.ndarray) -> np.ndarray:
    acc = np.full(z.shape, _LANCZOS_COEF[0], dtype=complex)
    for i in range(1, len(_LANCZOS_COEF)):
        acc = acc + _LANCZOS_COEF[i] / (z + i)
    return acc


def _lanczos_log(w: np.ndarray) -> np.ndarray:
    # valid for Re w >= 1/2
    z = w - 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(_lanczos_sum(z))


def _lanczos_value(w: np.ndarray) -> np.ndarray:
    z = w - 1.0
    t = z + _LANCZOS_G + 0.5
    return np.sqrt(2.0 * np.pi) * np.exp((z + 0.5) * np.log(t) - t) * _lanczos_sum(z)


def _log_gamma_unchecked(w: np.ndarray) -> np.ndarray:
    out = np.empty(w.shape, dtype=complex)
    right = w.real >= 0.5
    out[right] = _lanczos_log(w[right])
    left = ~right
    if np.any(left):
        wl = w[left]
        # upward recurrence keeps the principal (continuous) branch
        shift = np.ceil(0.5 - wl.real).astype(int)
        acc = np.zeros(wl.shape, dtype=complex)
        for k in range(int(shift.max())):
            active = k < shift
            acc[active] += np.log(wl[active] + k)
        out[left] = _lanczos_log(wl + shift) - acc
    return out


def log_gamma(w):
    """Principal branch of log Gamma(w).

    Lanczos (g = 7) in the half-plane Re w >= 1/2 and upward recurrence to the
    left of it, which keeps the result continuous along vertical lines.

    Raises
    ------
    PoleProximity
        If any argument is within 1e-9 of 0, -1, -2, ...
    """
    arr, scalar = _complex_array(w)
    _check_poles(arr)
    return _out(_log_gamma_unchecked(arr), scalar)


def gamma(w):
    """Euler's gamma function for complex arguments.

    Uses the reflection formula for Re w < 1/2 when the imaginary part is
    modest, and exp(log_gamma) otherwise to stay clear of overflow in sin.
    """
    arr, scalar = _complex_array(w)
    _check_poles(arr)
    out = np.empty(arr.shape, dtype=complex)
    right = arr.real >= 0.5
    out[right] = _lanczos_value(arr[right])
    refl = ~right & (np.abs(arr.imag) < 30.0)
    if np.any(refl):
        wr = arr[refl]
        out[refl] = np.pi / (np.sin(np.pi * wr) * _lanczos_value(1.0 - wr))
    far = ~right & ~refl
    if np.any(far):
        out[far] = np.exp(_log_gamma_unchecked(arr[far]))
    return _out(out, scalar)


def rgamma(w):
    """Reciprocal gamma 1/Gamma(w), entire; exactly zero at the poles."""
    arr, scalar = _complex_array(w)
    out = np.zeros(arr.shape, dtype=complex)
    pole = (arr.real < 0.5) & (np.abs(arr - np.round(arr.real)) < POLE_DISTANCE)
    ok = ~pole
    out[ok] = np.exp(-_log_gamma_unchecked(arr[ok]))
    return _out(out, scalar)


@dataclass(frozen=True)
class GammaEval:
    """Gamma value together with its principal-branch logarithm."""

    argument: complex
    value: complex
    log_value: complex


def gamma_eval(w) -> GammaEval:
    w = complex(w)
    return GammaEval(argument=w, value=gamma(w), log_value=log_gamma(w))


# ---------------------------------------------------------------------------
# K_z(2 sqrt x) from the integral representation
# ---------------------------------------------------------------------------

_PEAK_DROP = 40.0


def _level_crossing(a, nu, s_peak, target, direction):
    """Solve -a cosh s + nu s = target on one side of the (concave) peak."""
    step = np.ones_like(s_peak)
    for _ in range(80):
        s = s_peak + direction * step
        above = -a * np.cosh(s) + nu * s > target
        if not np.any(above):
            break
        step = np.where(above, 2.0 * step, step)
    lo = s_peak.copy()
    hi = s_peak + direction * step
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        above = -a * np.cosh(mid) + nu * mid > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return hi


def _k_line(z: np.ndarray, x: np.ndarray, tol: float, max_nodes: int):
    """Return (log_scale, total, relerr) with K_z(2 sqrt x) = 0.5 e^{log_scale} total.

    The integrand exp(-w cosh u + z u) is summed by the trapezoid rule along
    the line Im u = theta, where theta tracks the saddle direction so that
    large |Im z| does not cause cancellation.
    """
    w = 2.0 * np.sqrt(x)
    nu, tau = z.real, z.imag
    delta = np.minimum(0.25, 1.0 / (1.0 + np.abs(tau)))
    theta_cap = 0.5 * np.pi - delta
    theta = np.clip(np.arcsinh(z / w).imag, -theta_cap, theta_cap)
    a = w * np.cos(theta)
    s_peak = np.arcsinh(nu / a)
    peak = -a * np.cosh(s_peak) + nu * s_peak
    s_lo = _level_crossing(a, nu, s_peak, peak - _PEAK_DROP, -1.0)
    s_hi = _level_crossing(a, nu, s_peak, peak - _PEAK_DROP, 1.0)
    log_scale = peak - tau * theta

    def f(s):
        u = s + 1j * theta[:, None]
        return np.exp(-w[:, None] * np.cosh(u) + z[:, None] * u - log_scale[:, None])

    n_el = z.size
    total = np.zeros(n_el, dtype=complex)
    err = np.full(n_el, np.inf)
    active = np.arange(n_el)
    n = 32
    h = (s_hi - s_lo) / n
    nodes = s_lo[:, None] + h[:, None] * np.arange(n + 1)[None, :]
    vals = f(nodes)
    wts = np.ones(n + 1)
    wts[0] = wts[-1] = 0.5
    s_cur = h * (vals @ wts)
    m_cur = h * (np.abs(vals) @ wts)
    while active.size:
        n *= 2
        if n > max_nodes:
            break
        hh = h[active] / 2.0
        mids = s_lo[active, None] + hh[:, None] * (2 * np.arange(n // 2)[None, :] + 1)
        theta_a, w_a, z_a, ls_a = theta[active], w[active], z[active], log_scale[active]
        u = mids + 1j * theta_a[:, None]
        mv = np.exp(-w_a[:, None] * np.cosh(u) + z_a[:, None] * u - ls_a[:, None])
        s_new = 0.5 * s_cur[active] + hh * mv.sum(axis=1)
        m_new = 0.5 * m_cur[active] + hh * np.abs(mv).sum(axis=1)
        diff = np.abs(s_new - s_cur[active])
        s_cur[active] = s_new
        m_cur[active] = m_new
        h[active] = hh
        floor = 64.0 * np.finfo(float).eps * m_new
        done = diff <= tol * np.abs(s_new) + floor
        err[active] = np.maximum(diff, floor)
        total[active[done]] = s_new[done]
        active = active[~done]
    if active.size:
        total[active] = s_cur[active]
    with np.errstate(divide="ignore", invalid="ignore"):
        relerr = np.where(np.abs(total) > 0, err / np.abs(total), np.inf)
    return log_scale, total, relerr, active.size == 0


def _broadcast_zx(z, x):
    z_arr = np.asarray(z, dtype=complex)
    x_arr = np.asarray(x, dtype=float)
    scalar = z_arr.ndim == 0 and x_arr.ndim == 0
    zb, xb = np.broadcast_arrays(z_arr, x_arr)
    if np.any(xb <= 0) or not np.all(np.isfinite(xb)):
        raise ValueError("x must be positive and finite")
    return zb, xb, scalar


def _chunked_k_line(zf, xf, tol, max_nodes):
    log_scale = np.empty(zf.size)
    total = np.empty(zf.size, dtype=complex)
    relerr = np.empty(zf.size)
    ok = True
    chunk = 2048
    for start in range(0, zf.size, chunk):
        sl = slice(start, start + chunk)
        ls, tot, rel, conv = _k_line(zf[sl], xf[sl], tol, max_nodes)
        log_scale[sl], total[sl], relerr[sl] = ls, tot, rel
        ok = ok and conv
    return log_scale, total, relerr, ok


def besselk(z, x, tol: float = 1e-13, full_output: bool = False, max_nodes: int = 1 << 16):
    """Modified Bessel function K_z(2 sqrt x) for complex order z and x > 0.

    Parameters
    ----------
    z : complex or array_like
        Order.
    x : float or array_like
        Positive argument; the Bessel argument is ``2*sqrt(x)``.
    tol : float
        Relative tolerance for the trapezoid refinement.
    full_output : bool
        If True also return the relative error estimate.

    Raises
    ------
    NonConvergence
        If the node budget is exhausted before ``tol`` is reached.
    """
    zb, xb, scalar = _broadcast_zx(z, x)
    shape = zb.shape
    ls, tot, rel, ok = _chunked_k_line(zb.ravel(), xb.ravel(), tol, max_nodes)
    if not ok and np.max(rel) > 1e3 * tol:
        raise NonConvergence(f"besselk: relative error {np.max(rel):.2e} after {max_nodes} nodes")
    with np.errstate(under="ignore"):
        val = (0.5 * np.exp(ls) * tot).reshape(shape)
    rel = rel.reshape(shape)
    if full_output:
        return _out(val, scalar), (float(rel) if scalar else rel)
    return _out(val, scalar)


def kl_kernel(z, x, tol: float = 1e-13):
    """The transform kernel 2 x^{z/2} K_z(2 sqrt x), assembled in log space."""
    zb, xb, scalar = _broadcast_zx(z, x)
    shape = zb.shape
    zf, xf = zb.ravel(), xb.ravel()
    ls, tot, rel, ok = _chunked_k_line(zf, xf, tol, 1 << 16)
    if not ok and np.max(rel) > 1e3 * tol:
        raise NonConvergence(f"kl_kernel: relative error {np.max(rel):.2e}")
    with np.errstate(under="ignore", over="ignore"):
        val = np.exp(ls + 0.5 * zf * np.log(xf)) * tot
    return _out(val.reshape(shape), scalar)


# ---------------------------------------------------------------------------
# I_nu(2 sqrt x) by its power series
# ---------------------------------------------------------------------------

MAX_SERIES_TERMS = 200


def ikernel(nu, x, log_scale=0.0):
    """Weighted first-kind function x^{nu/2} I_nu(2 sqrt x) * exp(log_scale).

    Equals sum_n x^{n+nu} / (n! Gamma(n+nu+1)) times exp(log_scale). With
    nu = -(1+z) this is the inversion kernel; the leading factor is combined
    with ``log_scale`` before exponentiating so huge 1/Gamma values at large
    |Im nu| cannot overflow on their own.

    Raises
    ------
    SeriesNonConvergence
        If more than 200 terms are needed.
    """
    nu_a = np.asarray(nu, dtype=complex)
    x_a = np.asarray(x, dtype=float)
    ls_a = np.asarray(log_scale, dtype=complex)
    scalar = nu_a.ndim == 0 and x_a.ndim == 0 and ls_a.ndim == 0
    nu_b, x_b, ls_b = np.broadcast_arrays(nu_a, x_a, ls_a)
    shape = nu_b.shape
    nu_f, x_f, ls_f = nu_b.ravel().copy(), x_b.ravel(), ls_b.ravel().copy()
    if np.any(x_f <= 0):
        raise ValueError("x must be positive")
    logx = np.log(x_f)
    # x^{-m/2} I_{-m} = x^{-m} * x^{m/2} I_m for negative integer orders
    neg_int = (nu_f.real < 0.5) & (np.abs(nu_f - np.round(nu_f.real)) < POLE_DISTANCE)
    if np.any(neg_int):
        m = -np.round(nu_f.real[neg_int])
        ls_f[neg_int] += -m * logx[neg_int]
        nu_f[neg_int] = m
    lead = nu_f * logx - _log_gamma_unchecked(nu_f + 1.0) + ls_f
    term = np.ones(nu_f.shape, dtype=complex)
    total = term.copy()
    active = np.arange(nu_f.size)
    for n in range(1, MAX_SERIES_TERMS + 1):
        ratio = x_f[active] / (n * (n + nu_f[active]))
        term[active] *= ratio
        total[active] += term[active]
        nxt = np.abs(x_f[active] / ((n + 1) * (n + 1 + nu_f[active])))
        done = (np.abs(term[active]) <= 1e-17 * np.abs(total[active])) & (nxt < 0.5)
        active = active[~done]
        if active.size == 0:
            break
    if active.size:
        raise SeriesNonConvergence(f"I-series needs more than {MAX_SERIES_TERMS} terms")
    with np.errstate(under="ignore", over="ignore"):
        val = np.exp(lead) * total
    return _out(val.reshape(shape), scalar)


def besseli(nu, x):
    """Modified Bessel function I_nu(2 sqrt x) of complex order nu, x > 0."""
    nu_a = np.asarray(nu, dtype=complex)
    x_a = np.asarray(x, dtype=float)
    return ikernel(nu_a, x_a, -0.5 * nu_a * np.log(x_a))
