"""Exception types shared across the package."""


class SmoothvalError(Exception):
    """Base class for all package errors."""


class ChartMismatch(SmoothvalError):
    """Two forms or a map and a form live on incompatible charts."""


class DomainError(SmoothvalError):
    """A point (or a finite-difference stencil around it) left the chart domain."""


class DegreeError(SmoothvalError):
    """Form degree incompatible with the requested operation."""


class QuadratureBudgetExceeded(SmoothvalError):
    """Adaptive quadrature did not converge within its evaluation budget."""


class ContactDegeneracy(SmoothvalError):
    """d(alpha) degenerated on the contact plane at a sample point."""


class DegenerateBody(SmoothvalError):
    """Body has a degenerate boundary piece (edge shorter than tolerance)."""


class NotTransversal(SmoothvalError):
    """Bodies fail the stratum-by-stratum transversality test."""


class AntipodalCrossing(SmoothvalError):
    """Boundary crossing with antipodal normal directions."""


class AntipodalSingularity(SmoothvalError):
    """Fiber quadrature did not stabilize under shrinking of the antipodal cutoff."""


class OracleConditioning(SmoothvalError):
    """Least-squares fit inside the volume oracle is ill conditioned."""


class FitConditioning(SmoothvalError):
    """Kinematic coefficient fit is ill conditioned."""


class PairingSingular(SmoothvalError):
    """Poincare pairing matrix is numerically singular."""


class SamplingDegeneracy(SmoothvalError):
    """Too many Monte Carlo draws were rejected by the intersection routine."""


class ProductUnavailable(SmoothvalError):
    """Structure constants required for the functional calculus are missing."""
