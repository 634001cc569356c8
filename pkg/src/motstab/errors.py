"""Exception hierarchy shared by every module of the package."""


class TransportError(Exception):
    """Base class for all errors raised by motstab."""


class ZeroMass(TransportError, ValueError):
    """A quantity that needs positive mass was asked of the zero measure."""


class NotProbability(TransportError, ValueError):
    """A measure expected to have total mass one does not."""


class NumericalFailure(TransportError, ArithmeticError):
    """The LP solver could not certify its answer (ill-conditioned basis, drift)."""


class TooLarge(TransportError, ValueError):
    """An exhaustive enumeration would exceed its hard budget."""


class InfeasibleOrder(TransportError, ValueError):
    """mu is not smaller than nu in convex order, so no martingale coupling exists."""


class InfeasibleBarycenters(TransportError, ValueError):
    """Some barycenter constraint cannot be met on the pooled support."""


class InfeasiblePooled(TransportError, ValueError):
    """Two families of measures do not have the same pooled (summed) measure."""


class RepairFailed(TransportError):
    """Barycenter repair ran out of admissible moves.

    ``residuals`` holds the signed barycenter mismatch of every index at the
    moment the repair gave up.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class NonUniqueOptimizer(TransportError):
    """The limit problem has several optimizers, so plan convergence is ill-posed."""
