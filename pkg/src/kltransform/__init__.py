"""Numerical index transform with modified Bessel kernels K_z(2 sqrt x).

Forward and inverse transforms along vertical contours, the associated
convolution and its factorization, and a solver for first-kind convolution
integral equations.
"""
__version__ = "0.1.0"

from .errors import (ClosedFormMismatch, DivergentNorm, DomainViolation, EnvelopeTooWeak,
                     EnvelopeViolation, IdentityResidualExceeded, KLError, KernelZeroOnContour,
                     NonConvergence, PoleOnContour, PoleProximity, QuadratureNonConvergence,
                     SeriesNonConvergence, SingularIntegrand, StripViolation, ValidationError)
from .specfun import besseli, besselk, gamma, ikernel, kl_kernel, log_gamma, rgamma
from .quad import (ContourSpec, Envelope, QuadResult, integrate_contour, integrate_finite,
                   integrate_halfline, integrate_quarterplane)
from .mellin import (Decay, GridFunction, LineFunction, RealFunction, inverse_mellin, laplace,
                     mellin_forward, mellin_many, read_grid_csv, space_norm, write_grid_csv)
from .transform import (ImageEnvelope, TransformImage, derivative_shift_check, forward,
                        forward_laplace_route, forward_mellin_route, forward_tail,
                        index_integral_bessel, index_integral_exp, invert, invert_expansion)
from .convolution import (KernelSpec, convolve, factorization_check, kernel_kh, kernel_kh_quadrature,
                          kernel_product_check, parseval_check, young_norms)
from .solver import SolveConfig, solve, synthesize_rhs

__all__ = [
    "besseli", "besselk", "gamma", "ikernel", "kl_kernel", "log_gamma", "rgamma",
    "ContourSpec", "Envelope", "QuadResult", "integrate_contour", "integrate_finite",
    "integrate_halfline", "integrate_quarterplane",
    "Decay", "GridFunction", "LineFunction", "RealFunction", "inverse_mellin", "laplace",
    "mellin_forward", "mellin_many", "read_grid_csv", "space_norm", "write_grid_csv",
    "ImageEnvelope", "TransformImage", "derivative_shift_check", "forward", "forward_laplace_route",
    "forward_mellin_route", "forward_tail", "index_integral_bessel", "index_integral_exp", "invert",
    "invert_expansion",
    "KernelSpec", "convolve", "factorization_check", "kernel_kh", "kernel_kh_quadrature",
    "kernel_product_check", "parseval_check", "young_norms",
    "SolveConfig", "solve", "synthesize_rhs",
    "ClosedFormMismatch", "DivergentNorm", "DomainViolation", "EnvelopeTooWeak", "EnvelopeViolation", "IdentityResidualExceeded", "KLError", "KernelZeroOnContour", "NonConvergence", "PoleOnContour", "PoleProximity", "QuadratureNonConvergence", "SeriesNonConvergence", "SingularIntegrand", "StripViolation", "ValidationError",
]
