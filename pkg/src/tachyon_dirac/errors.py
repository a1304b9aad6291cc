"""Exception types raised by the library."""


class TachyonDiracError(Exception):
    """Base class for all library errors."""


class SubcriticalMomentum(TachyonDiracError, ValueError):
    """Momentum at or below ``m_s c``: the real energy branch does not exist there."""


class UndefinedForMassless(TachyonDiracError, ValueError):
    pass


class SpeedNotSuperluminal(TachyonDiracError, ValueError):
    pass


class MomentumOverflow(TachyonDiracError, OverflowError):
    """Requested speed is so close to ``c`` that the momentum exceeds the ceiling."""


class MasslessNormalization(TachyonDiracError, ValueError):
    pass


class SubcriticalContent(TachyonDiracError, ValueError):
    """Initial data populates ``|k| < m_s c`` modes under the ``reject`` policy."""


class DegenerateCharge(TachyonDiracError, ArithmeticError):
    """Total charge too small relative to the norm for a charge-weighted centroid."""


class GridMismatch(TachyonDiracError, ValueError):
    pass


class InvariantViolation(TachyonDiracError):
    """A numerical invariant check failed. ``check`` names the violated check."""

    def __init__(self, check: str, message: str):
        super().__init__(message)
        self.check = check
