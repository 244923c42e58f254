"""Named test functions with their metadata (and Mellin transforms when known)."""
from __future__ import annotations

from typing import Dict, Optional

import numpy as np

from .errors import ValidationError
from .mellin import Decay, LineFunction, RealFunction
from .quad import Envelope
from .specfun import gamma
from .transform import ImageEnvelope

__all__ = ["exp_function", "exp_rational", "exp_cosine", "monomial", "bump", "exp_derivative_line",
           "registry", "lookup", "EXP_IMAGE_ENVELOPE"]

# |F[e^{-x}](gamma + i tau)| ~ sqrt(2 pi) |tau|^{gamma - 1/2} e^{-pi |tau|/2}
EXP_IMAGE_ENVELOPE = ImageEnvelope(None, -0.5)


def exp_function(rate: float = 1.0) -> RealFunction:
    """x -> exp(-rate x), with derivatives up to order 4."""
    derivs = tuple((lambda k: (lambda x: (-rate) ** k * np.exp(-rate * np.asarray(x))))(k)
                   for k in range(1, 5))
    name = "exp" if rate == 1.0 else f"exp{rate:g}"
    return RealFunction(lambda x: np.exp(-rate * np.asarray(x)), 0.0, Decay(rate), sector=0.5 * np.pi,
                        derivatives=derivs, alpha=1.0, name=name)


def exp_rational() -> RealFunction:
    """x -> exp(-x) / (1 + x)."""
    return RealFunction(lambda x: np.exp(-np.asarray(x)) / (1.0 + np.asarray(x)), 0.0,
                        Decay(1.0), sector=0.5 * np.pi, alpha=1.0, name="exp_rational")


def exp_cosine(frequency: float = 3.0) -> RealFunction:
    """x -> exp(-x) cos(frequency x), a sign-changing test function."""
    return RealFunction(lambda x: np.exp(-np.asarray(x)) * np.cos(frequency * np.asarray(x)), 0.0,
                        Decay(1.0), sector=0.5 * np.pi, alpha=1.0, name="exp_cos")


def monomial(p: complex) -> RealFunction:
    """x -> x^p (Re p > -1); the transform kernel supplies the decay."""
    p = complex(p) if np.iscomplexobj(p) else float(p)
    if np.real(p) <= -1:
        raise ValidationError("monomial needs Re p > -1")
    return RealFunction(lambda x: np.exp(p * np.log(np.asarray(x, dtype=complex))), float(np.real(p)),
                        Decay(0.0, 1.0, float(np.real(p))), sector=np.pi, name=f"monomial({p:g})")


def bump(center: float = 1.0, width: float = 0.5) -> RealFunction:
    """Smooth compactly supported bump on (center - width, center + width)."""
    if not 0 < width < center:
        raise ValidationError("bump needs 0 < width < center")

    def func(x):
        u = (np.asarray(x, dtype=float) - center) / width
        inside = np.abs(u) < 1
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(inside, np.exp(-1.0 / np.where(inside, 1 - u * u, 1.0)), 0.0)

    return RealFunction(func, 5.0, Decay(50.0), name="bump")


def exp_line(n: int = 0, c0: Optional[float] = None) -> LineFunction:
    """Mellin transform of x^n e^{-x}: s -> Gamma(s + n) on Re s = c0."""
    if c0 is None:
        c0 = 0.5 - n
    if c0 <= -n:
        raise ValidationError("line must lie right of the first pole")
    return LineFunction(c0, lambda s: gamma(np.asarray(s, dtype=complex) + n),
                        Envelope(3.0, c0 + n - 0.5, 0.5 * np.pi), poles=(complex(-n),),
                        name="gamma" if n == 0 else f"gamma(s+{n})")


exp_derivative_line = exp_line


def registry() -> Dict[str, RealFunction]:
    return {"exp": exp_function(), "exp_rational": exp_rational(), "exp_cos": exp_cosine(),
            "bump": bump()}


def lookup(name: str) -> RealFunction:
    """Resolve a registry name; ``monomial(p)`` and ``exp(rate)`` take an argument."""
    name = name.strip()
    if name.startswith("monomial(") and name.endswith(")"):
        return monomial(float(name[9:-1]))
    if name.startswith("exp(") and name.endswith(")"):
        return exp_function(float(name[4:-1]))
    table = registry()
    if name not in table:
        raise ValidationError(f"unknown function {name!r}; known: {', '.join(sorted(table))}, monomial(p), exp(rate)")
    return table[name]
