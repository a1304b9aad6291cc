"""Exact plane-wave bispinors along +z and the bilinears built from them.

A bispinor is a length-4 complex array ordered ``(phi1, phi2, chi1, chi2)``.
The four solutions are labelled by helicity ``h`` and energy sign ``s``::

    (h, s) = (+1, +1)  psi_1 = N (1,  0,  A, 0)
             (-1, +1)  psi_2 = N (0, -A,  0, 1)
             (+1, -1)  psi_3 = N (1,  0, -A, 0)
             (-1, -1)  psi_4 = N (0,  A,  0, 1)

with ``A = (p - m_s) / |E|`` and ``N = sqrt((p + m_s) / (2 m_s))`` (c = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import algebra
from .algebra import ParticleKind
from .errors import MasslessNormalization, SubcriticalMomentum
from .kinematics import energy_from_momentum

__all__ = [
    "PlaneWaveSolution",
    "BRANCHES",
    "upper",
    "lower",
    "component_A",
    "normalization_N",
    "build_solution",
    "table_spinor",
    "charge_density",
    "current_density",
    "norm_density",
    "scalar",
    "pseudoscalar",
    "bilinears",
]

# (helicity, energy_sign) -> solution index 1..4
BRANCHES = {(1, 1): 1, (-1, 1): 2, (1, -1): 3, (-1, -1): 4}

_IMAG_TOL = 1e-14


def upper(s) -> np.ndarray:
    """The two-spinor ``phi`` (first two components)."""
    return np.asarray(s)[:2]


def lower(s) -> np.ndarray:
    """The two-spinor ``chi`` (last two components)."""
    return np.asarray(s)[2:]


def component_A(m_s: float, p: float) -> float:
    """``(p - m_s) / |E|``; lies in (0, 1) for ``m_s > 0`` and tends to 1 as p grows."""
    if not p > m_s:
        raise SubcriticalMomentum(f"A needs p > m_s c (|E| > 0); got p = {p!r}, m_s = {m_s!r}")
    if m_s == 0:
        return 1.0
    # (p - m)/sqrt((p - m)(p + m)) = sqrt((p - m)/(p + m)), free of cancellation
    return math.sqrt((p - m_s) / (p + m_s))


def normalization_N(m_s: float, p: float) -> float:
    if m_s == 0:
        raise MasslessNormalization("N = sqrt((p + m_s)/(2 m_s)) diverges for m_s = 0")
    if not m_s > 0 or not p >= 0:
        raise ValueError(f"need m_s > 0 and p >= 0, got m_s = {m_s!r}, p = {p!r}")
    return math.sqrt((p + m_s) / (2.0 * m_s))


def _check_sign(value: int, name: str) -> int:
    if value not in (1, -1):
        raise ValueError(f"{name} must be +1 or -1, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class PlaneWaveSolution:
    """Plane wave ``spinor * exp(i (p z - E t))`` of the antineutrino-form Hamiltonian."""

    m_s: float
    p: float
    helicity: int
    energy_sign: int
    spinor: np.ndarray
    E: float

    @property
    def index(self) -> int:
        return BRANCHES[(self.helicity, self.energy_sign)]

    def eigen_residual(self, kind: ParticleKind | str = ParticleKind.ANTINEUTRINO) -> float:
        """``max |H psi - E psi| / |E|``."""
        h = algebra.hamiltonian(self.m_s, self.p, kind)
        return float(np.max(np.abs(h @ self.spinor - self.E * self.spinor)) / abs(self.E))

    def helicity_residual(self) -> float:
        hel = np.kron(np.eye(2), algebra.pauli(3))
        return float(np.max(np.abs(hel @ self.spinor - self.helicity * self.spinor)))


def build_solution(m_s: float, p: float, helicity: int = 1, energy_sign: int = 1) -> PlaneWaveSolution:
    """Construct the normalized bispinor on the requested branch.

    The spinor is derived from the two-component eigen-equations rather than
    looked up: on the helicity slot ``e_h`` (``sigma_3 e_h = h e_h``) write
    ``phi = a e_h``, ``chi = b e_h``; then ``E a = (h p + m) b`` and
    ``E b = (h p - m) a``.  For ``h = +1`` this is ``chi = ((p - m)/E) phi``;
    for ``h = -1`` it is ``phi = -((p - m)/E) chi``.  The free amplitude is
    fixed to ``N``.
    """
    helicity = _check_sign(helicity, "helicity")
    energy_sign = _check_sign(energy_sign, "energy_sign")
    if not p > m_s:
        raise SubcriticalMomentum(f"plane waves need p > m_s c; got p = {p!r}, m_s = {m_s!r}")
    N = normalization_N(m_s, p)
    E = energy_sign * energy_from_momentum(m_s, p)
    # (p - m)/E, written through A to keep full relative precision
    ratio = energy_sign * component_A(m_s, p)
    spinor = np.zeros(4, dtype=complex)
    slot = 0 if helicity == 1 else 1
    if helicity == 1:
        spinor[slot] = N
        spinor[2 + slot] = ratio * N
    else:
        spinor[2 + slot] = N
        spinor[slot] = -ratio * N
    spinor.setflags(write=False)
    return PlaneWaveSolution(m_s=float(m_s), p=float(p), helicity=helicity,
                             energy_sign=energy_sign, spinor=spinor, E=E)


def table_spinor(index: int, m_s: float, p: float) -> np.ndarray:
    """The four bispinors written out literally, for cross-checking the builder."""
    A, N = component_A(m_s, p), normalization_N(m_s, p)
    table = {
        1: (1, 0, A, 0),
        2: (0, -A, 0, 1),
        3: (1, 0, -A, 0),
        4: (0, A, 0, 1),
    }
    return algebra.frozen(N * np.array(table[index], dtype=complex))


def _real(value: complex, name: str, scale: float = 1.0) -> float:
    if abs(value.imag) > _IMAG_TOL * max(scale, 1.0):
        raise ArithmeticError(f"{name} has imaginary part {value.imag!r}")
    return float(value.real)


def _sandwich(s, m) -> complex:
    s = np.asarray(s, dtype=complex)
    return complex(np.conj(s) @ (np.asarray(m) @ s))


def norm_density(s) -> float:
    s = np.asarray(s, dtype=complex)
    return float(np.real(np.vdot(s, s)))


def charge_density(s) -> float:
    """``psi^dagger gamma5 psi = phi^dagger chi + chi^dagger phi`` (not sign-definite)."""
    return _real(_sandwich(s, algebra.gamma5()), "charge density", norm_density(s))


def current_density(s) -> np.ndarray:
    """``psi^dagger gamma5 alpha_i psi`` for i = 1..3."""
    scale = norm_density(s)
    g5 = algebra.gamma5()
    return np.array([_real(_sandwich(s, g5 @ algebra.alpha(i)), f"current[{i}]", scale)
                     for i in (1, 2, 3)])


def scalar(s) -> float:
    """``psibar psi`` with ``psibar = psi^dagger beta``."""
    return _real(_sandwich(s, algebra.beta()), "scalar", norm_density(s))


def pseudoscalar(s) -> complex:
    """``psibar gamma5 psi = psi^dagger beta_s psi``.

    ``beta_s`` is anti-Hermitian, so for a generic bispinor this is purely
    imaginary; it vanishes on every plane-wave solution.
    """
    return _sandwich(s, algebra.beta() @ algebra.gamma5())


def bilinears(s) -> dict:
    j = current_density(s)
    ps = pseudoscalar(s)
    return {
        "rho": charge_density(s),
        "j_x": float(j[0]),
        "j_y": float(j[1]),
        "j_z": float(j[2]),
        "norm": norm_density(s),
        "scalar": scalar(s),
        "pseudoscalar_re": ps.real,
        "pseudoscalar_im": ps.imag,
    }
