"""Weyl-representation variables and the neutrino/antineutrino sign map.

``xi = (phi + chi)/sqrt(2)`` and ``eta = (phi - chi)/sqrt(2)`` turn the
bispinor equations into two Weyl-like equations coupled only by the mass::

    i d(xi)/dt  =  s sigma.k xi  - m_s eta
    i d(eta)/dt = -s sigma.k eta + m_s xi

where ``s = +1`` for the antineutrino form and ``s = -1`` for the neutrino form.
With ``m_s = 0`` the sectors decouple into the two massless Weyl equations.

The map ``alpha -> -alpha`` is realised by the Hermitian involution
``S = i beta_s``: ``S alpha_i S = -alpha_i`` and ``S beta_s S = beta_s``.
It preserves every anticommutation relation.  It also suggests an association
with CPT, but no charge-conjugation or time-reversal operator is built here.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import algebra
from .algebra import ParticleKind
from .errors import SubcriticalMomentum
from .kinematics import energy_from_momentum

__all__ = [
    "ChiralPair",
    "to_chiral",
    "from_chiral",
    "chiral_rhs",
    "chiral_generator",
    "bispinor_rhs",
    "chiral_charge",
    "chiral_current",
    "mass_coupling_ratio",
    "kind_map_matrix",
    "apply_kind_map",
    "weyl_solution",
]

_R2 = 1.0 / math.sqrt(2.0)


class ChiralPair(NamedTuple):
    xi: np.ndarray
    eta: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.xi, self.eta])


def to_chiral(s) -> ChiralPair:
    """Works on a single bispinor ``(4,)`` or a field ``(..., 4)``."""
    s = np.asarray(s, dtype=complex)
    phi, chi = s[..., :2], s[..., 2:]
    return ChiralPair(_R2 * (phi + chi), _R2 * (phi - chi))


def from_chiral(cp: ChiralPair) -> np.ndarray:
    xi = np.asarray(cp.xi, dtype=complex)
    eta = np.asarray(cp.eta, dtype=complex)
    return np.concatenate([_R2 * (xi + eta), _R2 * (xi - eta)], axis=-1)


def chiral_charge(cp: ChiralPair) -> float:
    """``xi^dagger xi - eta^dagger eta``."""
    return float(np.real(np.vdot(cp.xi, cp.xi) - np.vdot(cp.eta, cp.eta)))


def chiral_current(cp: ChiralPair) -> np.ndarray:
    """``xi^dagger sigma xi + eta^dagger sigma eta``."""
    return np.array([
        float(np.real(np.vdot(cp.xi, algebra.pauli(i) @ cp.xi) + np.vdot(cp.eta, algebra.pauli(i) @ cp.eta)))
        for i in (1, 2, 3)
    ])


def chiral_rhs(cp: ChiralPair, k, m_s: float, kind: ParticleKind | str = ParticleKind.ANTINEUTRINO) -> ChiralPair:
    """Time derivative of ``(xi, eta)`` for a single momentum mode ``k``."""
    sign = ParticleKind.parse(kind).alpha_sign
    sk = algebra.sigma_dot(k)
    xi = np.asarray(cp.xi, dtype=complex)
    eta = np.asarray(cp.eta, dtype=complex)
    dxi = -1j * (sign * (sk @ xi) - m_s * eta)
    deta = -1j * (-sign * (sk @ eta) + m_s * xi)
    return ChiralPair(dxi, deta)


def chiral_generator(m_s: float, k, kind: ParticleKind | str = ParticleKind.ANTINEUTRINO) -> np.ndarray:
    """4x4 matrix ``G`` with ``d/dt (xi, eta) = G (xi, eta)``, assembled from the Weyl blocks."""
    sign = ParticleKind.parse(kind).alpha_sign
    sk = np.asarray(algebra.sigma_dot(k))
    eye = np.eye(2)
    return -1j * np.block([[sign * sk, -m_s * eye], [m_s * eye, -sign * sk]])


def bispinor_rhs(s, k, m_s: float, kind: ParticleKind | str = ParticleKind.ANTINEUTRINO) -> np.ndarray:
    """``-i H(k) psi``, written out through the two-component equations."""
    sign = ParticleKind.parse(kind).alpha_sign
    sk = algebra.sigma_dot(k)
    s = np.asarray(s, dtype=complex)
    phi, chi = s[:2], s[2:]
    dphi = -1j * (sign * (sk @ chi) + m_s * chi)
    dchi = -1j * (sign * (sk @ phi) - m_s * phi)
    return np.concatenate([dphi, dchi])


def mass_coupling_ratio(m_s: float, p: float) -> float:
    """``|eta| / |xi|`` for the positive-helicity, positive-energy plane wave.

    Equals ``(1 - A)/(1 + A) = m_s / (p + E)``, which vanishes linearly in
    ``m_s`` at fixed ``p``.
    """
    if m_s < 0:
        raise ValueError(f"proper mass must be non-negative, got {m_s}")
    if not p > m_s:
        raise SubcriticalMomentum(f"need p > m_s c; got p = {p!r}, m_s = {m_s!r}")
    return m_s / (p + energy_from_momentum(m_s, p))


def kind_map_matrix() -> np.ndarray:
    """``S = i beta_s``: Hermitian, unitary, ``S @ S = I``."""
    return algebra.frozen(1j * algebra.beta_s())


def apply_kind_map(x):
    """Map between antineutrino and neutrino forms.

    A 4x4 matrix is conjugated, ``S M S``; this turns
    ``hamiltonian(m, p, antineutrino)`` into ``hamiltonian(m, p, neutrino)``.
    A bispinor (or a field of shape ``(..., 4)``) is mapped to ``S psi``, which
    carries eigenvectors of one form to eigenvectors of the other with the same
    energy.  Applying the map twice is the identity.
    """
    s = kind_map_matrix()
    x = np.asarray(x)
    if x.shape == (4, 4):
        return algebra.frozen(s @ x @ s)
    if x.shape[-1] != 4:
        raise ValueError(f"expected a 4x4 matrix or (..., 4) bispinor data, got shape {x.shape}")
    return np.asarray(x, dtype=complex) @ s.T


def weyl_solution(p: float, kind: ParticleKind | str = ParticleKind.ANTINEUTRINO, energy_sign: int = 1) -> np.ndarray:
    """Unit-norm massless plane wave along +z carried entirely by ``xi``.

    The ``xi`` sector obeys ``i d(xi)/dt = s sigma.k xi``, so energy ``+p``
    requires ``sigma_3 xi = s xi``: right-handed for the antineutrino form,
    left-handed for the neutrino form.  ``energy_sign = -1`` picks the opposite
    helicity.
    """
    if not p > 0:
        raise ValueError(f"momentum must be positive, got {p!r}")
    if energy_sign not in (1, -1):
        raise ValueError(f"energy_sign must be +1 or -1, got {energy_sign!r}")
    helicity = ParticleKind.parse(kind).alpha_sign * energy_sign
    xi = np.array([1.0, 0.0], dtype=complex) if helicity == 1 else np.array([0.0, 1.0], dtype=complex)
    return from_chiral(ChiralPair(xi, np.zeros(2, dtype=complex)))
