"""Exception types raised across the package."""


class DimensionMismatchError(ValueError):
    """Operand shapes or subsystem layouts do not agree."""


class NotHermitianError(ValueError):
    pass


class NegativeEigenvalueError(ValueError):
    pass


class InvalidStateError(ValueError):
    """A matrix fails the density-matrix checks (Hermitian, unit trace, PSD)."""


class InvalidChannelError(ValueError):
    pass


class RankDeficientError(ValueError):
    """Regression design matrix has collinear columns."""


class InvariantViolation(RuntimeError):
    """An internal numerical invariant failed; indicates a bug, not bad input."""
