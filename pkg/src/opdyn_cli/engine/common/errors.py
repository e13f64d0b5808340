"""Exception hierarchy for the operator-dynamics engine."""

from typing import Optional, Sequence


class OpdynError(Exception):
    """Base class for every error raised by the engine."""

    kind = "error"


class InvalidInputError(OpdynError, ValueError):
    """Input data violates a precondition (shape, finiteness, Hermiticity, range)."""

    kind = "invalid-input"


class NumericError(OpdynError, ArithmeticError):
    """A numerical kernel failed (e.g. SVD did not converge)."""

    kind = "numeric"


class ResourceError(OpdynError):
    """A configured size limit would be exceeded."""

    kind = "resource"


class BondDimensionError(ResourceError):
    """A bond would grow past the hard cap on bond dimension."""

    def __init__(self, bond: int, requested: int, cap: int):
        self.bond = bond
        self.requested = requested
        self.cap = cap
        super().__init__(
            f"bond ({bond}, {bond + 1}) needs dimension {requested}, above the hard cap {cap}"
        )


class TrainingDivergedError(NumericError):
    """Training produced a non-finite cost."""

    kind = "training-diverged"

    def __init__(self, epoch: int, cost: float):
        self.epoch = epoch
        self.cost = cost
        super().__init__(f"training diverged at epoch {epoch} (cost={cost})")


class RolloutDivergedError(NumericError):
    """Autoregressive prediction produced a non-finite value."""

    kind = "rollout-diverged"

    def __init__(self, step: int, partial: Optional[Sequence[float]] = None):
        self.step = step
        self.partial = [] if partial is None else [float(v) for v in partial]
        super().__init__(f"rollout diverged at step {step}")


class UsageError(OpdynError):
    """Command-line flags or config keys are invalid."""

    kind = "usage"
