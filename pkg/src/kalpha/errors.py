"""Exception types raised across the package."""


class KalphaError(Exception):
    """Base class for every error raised by kalpha."""


class DegeneratePoint(KalphaError):
    """The chart is singular at the requested point (X_s x X_theta ~ 0)."""


class NonFiniteDerivative(KalphaError):
    """A chart returned non-finite values while differentiating."""


class OffsetSingularity(KalphaError):
    """1 - 2*lam*H + lam^2*K vanishes: the offset hits a focal point."""


class DegenerateCoefficients(KalphaError):
    """Weingarten coefficients violate b != 0 or b^2 != a*c."""


class ZeroCurvature(KalphaError):
    """Principal normal undefined on a curved spine (kappa = 0)."""


class InvalidRadius(KalphaError):
    """Radius profile breaks canal regularity (|r'| >= 1 or r <= 0)."""


class NoRealBranch(KalphaError):
    """The translator radius equation has no admissible real r''."""


class StiffStop(KalphaError):
    """ODE step size underflowed."""


class IntegrandDomainError(KalphaError):
    """A quadrature integrand is complex or infinite at some radius."""

    def __init__(self, message, r=None):
        super().__init__(message)
        self.r = r


class NonMonotone(KalphaError):
    """Tabulated s(r) is not strictly monotone on the requested branch."""


class ConvexityLoss(KalphaError):
    """K <= 0 appeared where a real power K**alpha is required."""


class StepTooLarge(KalphaError):
    """The flow time step violates the stability bound or reorders nodes."""


class UnknownWitness(KalphaError):
    """Requested witness id is not registered."""


class ConfigError(KalphaError):
    """Run configuration is malformed or incomplete."""
