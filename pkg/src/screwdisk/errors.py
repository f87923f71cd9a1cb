"""Exception types.

Every error carries a short machine-readable ``kind`` that the CLI reports
on stderr.
"""


class ScrewDiskError(ValueError):
    kind = "validation"


class DomainError(ScrewDiskError):
    """A point lies on or outside the unit circle."""

    kind = "domain"


class CollisionError(ScrewDiskError):
    """Two dislocations coincide (the energy is +inf)."""

    kind = "collision"


class CompatibilityError(ScrewDiskError):
    """A Neumann datum has non-zero boundary mean."""

    kind = "compatibility"


class StencilError(ScrewDiskError):
    kind = "stencil"


class InfeasibleError(ScrewDiskError):
    kind = "infeasible_n"


class HypothesisError(ScrewDiskError):
    """The boundary datum violates f >= 0."""

    kind = "hypothesis"


class CostGuardError(ScrewDiskError):
    kind = "refusal"


class StallError(ScrewDiskError):
    """Line search could not find an admissible decreasing step.

    ``best`` and ``trace`` hold the best iterate reached and its history.
    """

    kind = "stall"

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace
