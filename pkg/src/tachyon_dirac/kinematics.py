"""Spacelike energy-momentum relations and the superluminal speed parameterization.

With c = 1 a tachyon of proper mass ``m_s`` obeys ``E**2 = p**2 - m_s**2`` and
moves at ``u_s = p / E > 1``.  Only the real, positive-energy branch
``p >= m_s`` is handled here; subcritical momenta raise instead of returning NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    MomentumOverflow,
    SpeedNotSuperluminal,
    SubcriticalMomentum,
    UndefinedForMassless,
)

__all__ = [
    "KinematicPoint",
    "DEFAULT_MAX_MOMENTUM_RATIO",
    "energy_from_momentum",
    "speed_from_momentum",
    "momentum_from_speed",
    "energy_from_speed",
    "group_velocity",
    "mass_square",
]

# Above p = 1e6 m_s c the speed u_s - 1 < 5e-13 carries under three significant
# digits, so inverting it for p is meaningless in double precision.
DEFAULT_MAX_MOMENTUM_RATIO = 1e6


def _check_mass(m_s: float) -> None:
    if not m_s >= 0 or math.isinf(m_s):
        raise ValueError(f"proper mass must be finite and non-negative, got {m_s}")


def energy_from_momentum(m_s: float, p: float) -> float:
    """Positive root of ``E**2 = p**2 - m_s**2``.

    Raises SubcriticalMomentum for ``p < m_s``.
    """
    _check_mass(m_s)
    if not p >= 0:
        raise ValueError(f"momentum magnitude must be non-negative, got {p}")
    if p < m_s:
        raise SubcriticalMomentum(f"p = {p!r} < m_s c = {m_s!r}: energy is imaginary")
    # factored form avoids cancellation near p = m_s
    return math.sqrt((p - m_s) * (p + m_s))


def speed_from_momentum(m_s: float, p: float) -> float:
    """Speed in units of c, ``u_s = p / E``."""
    _check_mass(m_s)
    if m_s == 0:
        raise UndefinedForMassless("massless particles move at c for every momentum")
    if not p > m_s:
        raise SubcriticalMomentum(f"p = {p!r} must exceed m_s c = {m_s!r}")
    return p / energy_from_momentum(m_s, p)


def group_velocity(m_s: float, p: float) -> float:
    """Analytic ``dE/dp``; the massless case returns exactly 1."""
    _check_mass(m_s)
    if m_s == 0:
        if not p > 0:
            raise SubcriticalMomentum(f"p = {p!r} must be positive")
        return 1.0
    if not p > m_s:
        raise SubcriticalMomentum(f"p = {p!r} must exceed m_s c = {m_s!r}")
    return p / energy_from_momentum(m_s, p)


def _gamma_s(u_s: float) -> float:
    """``1 / sqrt(u_s**2 - 1)`` for a superluminal speed."""
    if not u_s > 1:
        raise SpeedNotSuperluminal(f"u_s = {u_s!r} c is not superluminal")
    if math.isinf(u_s):
        return 0.0
    return 1.0 / math.sqrt((u_s - 1.0) * (u_s + 1.0))


def momentum_from_speed(m_s: float, u_s: float, max_ratio: float = DEFAULT_MAX_MOMENTUM_RATIO) -> float:
    """``p = m_s u_s / sqrt(u_s**2 - 1)``.

    MomentumOverflow is raised when ``p / m_s`` would exceed ``max_ratio``,
    i.e. when ``u_s`` is too close to 1 for the inversion to be meaningful.
    """
    _check_mass(m_s)
    if m_s == 0:
        raise UndefinedForMassless("momentum is not determined by speed for m_s = 0")
    g = _gamma_s(u_s)
    ratio = u_s * g if g else 1.0
    if not ratio <= max_ratio:
        raise MomentumOverflow(f"u_s = {u_s!r} c gives p / m_s c = {ratio:.3e} > {max_ratio:.3e}")
    return m_s * ratio


def energy_from_speed(m_s: float, u_s: float) -> float:
    """``E = m_s / sqrt(u_s**2 - 1)``."""
    _check_mass(m_s)
    return m_s * _gamma_s(u_s)


def mass_square(m_s: float) -> float:
    """Signed mass-square ``-m_s**2`` in the timelike convention (eV**2)."""
    _check_mass(m_s)
    return -m_s * m_s


@dataclass(frozen=True)
class KinematicPoint:
    """A consistent ``(m_s, p, E, u_s)`` tuple, c = 1."""

    m_s: float
    p: float
    E: float
    u_s: float

    @classmethod
    def from_momentum(cls, m_s: float, p: float) -> "KinematicPoint":
        E = energy_from_momentum(m_s, p)
        u = 1.0 if m_s == 0 else speed_from_momentum(m_s, p)
        return cls(m_s=float(m_s), p=float(p), E=E, u_s=u)

    @classmethod
    def from_speed(cls, m_s: float, u_s: float, max_ratio: float = DEFAULT_MAX_MOMENTUM_RATIO) -> "KinematicPoint":
        p = momentum_from_speed(m_s, u_s, max_ratio=max_ratio)
        return cls(m_s=float(m_s), p=p, E=energy_from_momentum(m_s, p), u_s=float(u_s))

    @property
    def mass_square(self) -> float:
        return mass_square(self.m_s)

    def dispersion_residual(self) -> float:
        """Relative deviation of ``E**2`` from ``p**2 - m_s**2``."""
        target = (self.p - self.m_s) * (self.p + self.m_s)
        scale = max(self.p * self.p, 1e-300)
        return abs(self.E * self.E - target) / scale
