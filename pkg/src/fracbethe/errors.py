"""Exception types shared across the package."""


class InvalidModelError(ValueError):
    """Model violates a structural requirement (symmetry, positive definiteness, ...)."""


class DomainBoundaryError(ValueError):
    """Free-energy evaluation requested at or beyond the unit-correlation boundary."""


class SpectralConvergenceError(RuntimeError):
    """Power iteration hit its iteration cap before reaching the residual target."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class PartitionError(ValueError):
    """Potential partition is infeasible or inconsistent with the requested scheme."""


class BeliefNotNormalizableError(RuntimeError):
    """A message-passing belief lost positive-definite precision."""


class NumericFailureError(RuntimeError):
    """A command that required convergence did not get it."""


class GenerationError(RuntimeError):
    """Random model generation exhausted its retry budget."""
