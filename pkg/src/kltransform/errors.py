"""Exception hierarchy shared by all modules."""


class KLError(Exception):
    """Base class for all library errors."""


class ValidationError(KLError, ValueError):
    """Bad input detected before any numerics run."""


class PoleProximity(ValidationError):
    """Gamma argument too close to a nonpositive integer."""


class DomainViolation(ValidationError):
    """Argument outside the half-plane where a transform converges."""


class StripViolation(ValidationError):
    """Mellin argument outside the declared convergence strip."""


class PoleOnContour(ValidationError):
    """Contour abscissa passes through a declared pole."""


class DivergentNorm(ValidationError):
    """Envelope does not certify a finite norm."""


class EnvelopeTooWeak(ValidationError):
    """Declared image decay does not make the inversion integral converge."""


class KernelZeroOnContour(ValidationError):
    """Kernel image is (numerically) zero on the contour."""


class EnvelopeViolation(KLError):
    """Sampled values exceed the declared envelope by more than 10x."""


class NonConvergence(KLError):
    """Numerical budget exhausted before the tolerance was met."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


QuadratureNonConvergence = NonConvergence


class SeriesNonConvergence(NonConvergence):
    """Power series did not converge within the term budget."""


class SingularIntegrand(KLError):
    """Integrand returned a non-finite value inside the domain."""


class IdentityResidualExceeded(KLError):
    """Two sides of an identity disagree beyond tolerance."""


class ClosedFormMismatch(KLError):
    """Closed form and quadrature disagree beyond tolerance."""
