"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Operand shapes or declared factor dimensions disagree."""


class SupportViolation(ValueError):
    """A matrix has components outside the operator-space block an operation requires."""


class EigenConvergenceError(RuntimeError):
    """The symmetric eigensolver failed to converge (numerically pathological input)."""


class NotLocallyPositive(ValueError):
    """A shadow was requested of a map that does not descend to the shadow spaces."""


class InfeasibleShadow(ValueError):
    """The fiber of the given shadow contains no positive global state."""
