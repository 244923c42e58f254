"""Command-line front end.

Every command validates its arguments before computing, writes one table
(CSV or JSON) and exits with 0 on success, 2 on invalid input and 3 on a
numerical failure (non-convergence or a failed check).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .convolution import KernelSpec, convolve, kernel_kh
from .errors import KLError, ValidationError
from .functions import EXP_IMAGE_ENVELOPE, lookup
from .mellin import Decay, read_grid_csv
from .quad import ContourSpec
from .solver import SolveConfig, solve, synthesize_rhs
from .specfun import besselk
from .transform import (TransformImage, default_gamma, forward, forward_laplace_route,
                        forward_mellin_route, invert)
from .verify import run_suite

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def parse_complex(text: str) -> complex:
    """'re,im' or a plain real number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ValidationError(f"cannot parse complex value {text!r}; use 're,im'")


def parse_positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"not a number: {text!r}") from None
    if not value > 0:
        raise ValidationError(f"expected a positive value, got {text!r}")
    return value


def _kernel(args) -> KernelSpec:
    if args.kernel == "half_inverse_sqrt":
        return KernelSpec.half_inverse_sqrt()
    if args.beta is None:
        raise ValidationError("--kernel power needs --beta")
    return KernelSpec.power(args.beta)


def _row(inputs: dict, value, err, evals=0, converged=True) -> dict:
    value = complex(value)
    row = {k: float(v) if isinstance(v, np.floating) else v for k, v in inputs.items()}
    row.update({"value_re": value.real, "value_im": value.imag, "err_abs": float(err),
                "evals": int(evals), "converged": bool(converged)})
    return row


def _contour(args, gamma_: float) -> ContourSpec:
    return ContourSpec(gamma=gamma_, step=args.step, tol=args.tol, rtol=args.tol,
                       truncation=args.height)


def cmd_eval_k(args) -> List[dict]:
    tol = max(min(args.tol, 1e-10), 1e-14)
    value, rel = besselk(args.z, args.x, tol=tol, full_output=True)
    return [_row({"z_re": args.z.real, "z_im": args.z.imag, "x": args.x}, value,
                 abs(complex(value)) * max(rel, 1e-16), 0, rel <= 1e3 * tol)]


def cmd_forward(args) -> List[dict]:
    f = lookup(args.f)
    z = args.z
    if args.route == "direct":
        res = forward(f, z, args.tol, full_output=True)
    elif args.route == "laplace":
        res = forward_laplace_route(f, z, args.tol, full_output=True)
    else:
        if args.f != "exp":
            raise ValidationError("the Mellin route is available for f = exp only")
        from .functions import exp_line
        res = forward_mellin_route(exp_line(), z, args.tol, full_output=True)
    return [_row({"f": args.f, "route": args.route, "z_re": z.real, "z_im": z.imag},
                 res.value, res.err_abs, res.evals, res.converged)]


def cmd_invert(args) -> List[dict]:
    f = lookup(args.f)
    envelope = EXP_IMAGE_ENVELOPE if args.f == "exp" else None
    image = TransformImage.from_function(f, envelope)
    gamma_ = args.gamma if args.gamma is not None else default_gamma(image)
    ts = np.array(args.t, dtype=float)
    res = invert(image, ts, _contour(args, gamma_), strict=args.strict, full_output=True)
    return [_row({"f": args.f, "gamma": gamma_, "t": t}, v, e, res.evals, res.converged)
            for t, v, e in zip(ts, np.atleast_1d(res.value), np.atleast_1d(res.err_abs))]


def cmd_convolve(args) -> List[dict]:
    f, g = lookup(args.f), lookup(args.g)
    xs = np.array(args.x, dtype=float)
    res = convolve(f, g, xs, args.tol, full_output=True)
    return [_row({"f": args.f, "g": args.g, "x": x}, v, e, res.evals, res.converged)
            for x, v, e in zip(xs, np.atleast_1d(res.value), np.atleast_1d(res.err_abs))]


def cmd_kernel(args) -> List[dict]:
    spec = _kernel(args)
    value = kernel_kh(spec, args.x, args.y, args.tol)
    return [_row({"kernel": spec.closed_form, "beta": spec.beta if spec.beta is not None else "",
                  "x": args.x, "y": args.y}, value, 10 * args.tol * abs(value))]


def cmd_solve(args) -> List[dict]:
    spec = _kernel(args)
    if args.grid is not None:
        g = read_grid_csv(args.grid, origin_exponent=-spec.lower_bound, decay=Decay(rate=2.0, order=0.5))
    elif args.f is not None:
        g = synthesize_rhs(lookup(args.f), spec, analytic=True)
    else:
        raise ValidationError("solve needs --grid <file.csv> or a manufactured --f")
    if args.gamma is None or args.alpha is None:
        raise ValidationError("solve needs --gamma and --alpha")
    config = SolveConfig(spec, args.gamma, args.alpha, tol=args.tol, zero_guard=args.zero_guard)
    ts = np.array(args.t, dtype=float)
    _, info = solve(g, config, ts, full_output=True)
    return [_row({"kernel": spec.closed_form, "gamma": args.gamma, "t": t}, v, e, 0, info["converged"])
            for t, v, e in zip(ts, info["values"], info["err"])]


def cmd_verify(args) -> List[dict]:
    rows = []
    for check in run_suite(args.suite):
        row = _row({"suite": args.suite, "check": check.check}, check.value, check.err_abs, check.evals,
                   check.converged)
        row.update({"reference": repr(complex(check.reference)), "residual": check.residual,
                    "threshold": check.threshold, "passed": check.passed})
        rows.append(row)
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kltransform", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=parse_positive, help="target accuracy (default 1e-10, solve 1e-6)")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval-k", parents=[common], help="K_z(2 sqrt x)")
    p.add_argument("--z", type=parse_complex, required=True)
    p.add_argument("--x", type=parse_positive, required=True)
    p.set_defaults(run=cmd_eval_k)

    p = sub.add_parser("forward", parents=[common], help="(Ff)(z)")
    p.add_argument("--f", required=True)
    p.add_argument("--z", type=parse_complex, required=True)
    p.add_argument("--route", choices=("direct", "mellin", "laplace"), default="direct")
    p.set_defaults(run=cmd_forward)

    contour = _Parser(add_help=False)
    contour.add_argument("--gamma", type=float)
    contour.add_argument("--step", type=parse_positive, help="fixed trapezoid step (deterministic policy)")
    contour.add_argument("--height", type=parse_positive, help="contour truncation height")

    p = sub.add_parser("invert", parents=[common, contour], help="f(t) from the image of a named f")
    p.add_argument("--f", required=True)
    p.add_argument("--t", type=parse_positive, nargs="+", required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(run=cmd_invert)

    p = sub.add_parser("convolve", parents=[common], help="(f * g)(x)")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--x", type=parse_positive, nargs="+", required=True)
    p.set_defaults(run=cmd_convolve)

    kernel = _Parser(add_help=False)
    kernel.add_argument("--kernel", choices=("half_inverse_sqrt", "power"), required=True)
    kernel.add_argument("--beta", type=parse_positive)

    p = sub.add_parser("kernel", parents=[common, kernel], help="k_h(x, y)")
    p.add_argument("--x", type=parse_positive, required=True)
    p.add_argument("--y", type=parse_positive, required=True)
    p.set_defaults(run=cmd_kernel)

    p = sub.add_parser("solve", parents=[common, kernel], help="solve the first-kind equation")
    p.add_argument("--grid", help="CSV with header x,f holding g")
    p.add_argument("--f", help="manufactured solution name (g is synthesized)")
    p.add_argument("--gamma", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--zero-guard", type=parse_positive, default=1e-12)
    p.add_argument("--t", type=parse_positive, nargs="+", required=True)
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="run an identity suite")
    p.add_argument("--suite", required=True)
    p.set_defaults(run=cmd_verify)
    return parser


def _meta(args) -> dict:
    keys = ("command", "tol", "gamma", "alpha", "step", "height", "suite", "route")
    meta = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    meta["version"] = __version__
    return meta


def _plain(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def render(rows: List[dict], fmt: str, meta: dict) -> str:
    rows = [{k: _plain(v) if isinstance(v, (np.bool_, np.floating)) else v for k, v in row.items()}
            for row in rows]
    if fmt == "json":
        return json.dumps({"rows": rows, "meta": meta}, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _plain(v) for k, v in row.items()})
    return buf.getvalue()


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.tol is None:
            args.tol = 1e-6 if args.command == "solve" else 1e-10
        rows = args.run(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except KLError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(rows, args.format, _meta(args))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    if args.command == "verify" and not all(r["passed"] for r in rows):
        print("verification failed", file=sys.stderr)
        return EXIT_NUMERIC
    if not all(r["converged"] for r in rows):
        print("warning: some values did not reach the requested tolerance", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
