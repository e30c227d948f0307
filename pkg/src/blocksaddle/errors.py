"""Exception types shared across the package."""


class BlockSaddleError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BlockSaddleError, ValueError):
    """Problem data violates a structural invariant."""


class InfeasibleTighteningError(BlockSaddleError):
    """The tightened right-hand side b - rho admits no strictly feasible point."""


class SlaterError(BlockSaddleError):
    """A supplied point is not strictly feasible for the tightened constraints."""


class NotInBoxError(BlockSaddleError):
    """A point lies outside the box product Z."""


class StepSizeError(BlockSaddleError):
    """Step sizes violate the admissible range for convergence."""


class ConvergenceError(BlockSaddleError):
    """An iterative routine failed to reach its tolerance within its budget."""


class NonFiniteIterateError(BlockSaddleError):
    """An iterate became NaN or infinite during a run."""

    def __init__(self, tick, message=None):
        self.tick = tick
        super().__init__(message or f"non-finite iterate at tick {tick}")


class EnumerationError(BlockSaddleError):
    """Exact enumeration is not applicable or exceeds its size guard."""


class InfeasibleInstanceError(BlockSaddleError):
    """The instance has no feasible point."""


class GenerationError(BlockSaddleError):
    """Random instance generation failed after the allowed number of redraws."""
