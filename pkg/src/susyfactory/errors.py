"""Exception hierarchy shared by all susyfactory modules."""


class SusyError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SusyError):
    """Malformed superpotential text.

    Attributes
    ----------
    position : int
        Zero-based character offset at which the problem was detected.
    """

    def __init__(self, message, position=0):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvaluationError(SusyError):
    """Expression could not be evaluated (pole hit, unbound parameter)."""


class UnboundParameter(EvaluationError):
    pass


class NonMonomial(SusyError):
    """Expression is not a finite sum of monomials in x, 1/x, |x|, sign(x)."""


class OrderOverflow(SusyError):
    """Operator product would exceed derivative order 2."""


class EvenProductViolation(SusyError):
    """Type-II generators need W1*W2 to be an even function of x."""


class InconsistentFactorization(SusyError):
    """Leibniz product and closed-form Hamiltonian disagree (internal bug)."""


class NotQuadraticForm(SusyError):
    """Operator does not fit the SU(1,1) quadratic template."""


class RadicandNonpositive(SusyError):
    pass


class DomainError(SusyError):
    pass


class DiscretizationError(SusyError):
    pass


class PoleInCoefficient(DiscretizationError):
    pass


class QuadratureBreakdown(DiscretizationError):
    pass


class PoleOnGrid(DiscretizationError):
    pass


class KinkOnGrid(DiscretizationError):
    pass


class ThetaOutOfRange(DiscretizationError):
    pass


class NoConvergence(SusyError):
    """Eigensolver hit its iteration cap.

    The eigenvalues deflated before the cap are kept on ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InsufficientConverged(SusyError):
    pass


class ConfigError(SusyError):
    pass
