"""Concrete 4x4 matrices for the tachyonic Hamiltonian H = +-alpha.p + beta_s m_s.

All matrices are returned as read-only complex ``numpy`` arrays, so they can be
shared freely; arithmetic on them produces fresh arrays.  Natural units are used
throughout (hbar = c = 1): masses and energies in eV, momenta in eV/c.

Block layout (2x2 blocks, ``I`` the 2x2 identity)::

    alpha_i = [[0, s_i], [s_i, 0]]      beta_s = [[0, I], [-I, 0]]
    beta    = [[I, 0], [0, -I]]         gamma5 = [[0, I], [I, 0]]
    gamma^0 = beta                      gamma^i = [[0, s_i], [-s_i, 0]]
"""

from __future__ import annotations

from enum import Enum

import numpy as np

__all__ = [
    "ParticleKind",
    "frozen",
    "identity",
    "pauli",
    "alpha",
    "beta",
    "beta_s",
    "gamma5",
    "gamma",
    "anticommutator",
    "commutator",
    "dagger",
    "exactly_equal",
    "allclose",
    "max_residual",
    "hamiltonian",
    "sigma_dot",
    "alpha_dot",
    "verify_identities",
]


class ParticleKind(str, Enum):
    """Sign convention of the kinetic term.

    ``ANTINEUTRINO`` is the original Hamiltonian ``+alpha.p + beta_s m``;
    ``NEUTRINO`` is obtained from it by ``alpha -> -alpha``.
    """

    ANTINEUTRINO = "antineutrino"
    NEUTRINO = "neutrino"

    @property
    def alpha_sign(self) -> int:
        return 1 if self is ParticleKind.ANTINEUTRINO else -1

    @property
    def flipped(self) -> "ParticleKind":
        if self is ParticleKind.ANTINEUTRINO:
            return ParticleKind.NEUTRINO
        return ParticleKind.ANTINEUTRINO

    @classmethod
    def parse(cls, value: "str | ParticleKind") -> "ParticleKind":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("_", "-")
        aliases = {
            "antineutrino": cls.ANTINEUTRINO,
            "antineutrino-form": cls.ANTINEUTRINO,
            "anti": cls.ANTINEUTRINO,
            "neutrino": cls.NEUTRINO,
            "neutrino-form": cls.NEUTRINO,
        }
        try:
            return aliases[text]
        except KeyError:
            raise ValueError(f"unknown particle kind {value!r}") from None


def frozen(a) -> np.ndarray:
    """Return a read-only complex copy of ``a``."""
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

_PAULI = (
    frozen([[0, 1], [1, 0]]),
    frozen([[0, -1j], [1j, 0]]),
    frozen([[1, 0], [0, -1]]),
)


def _blocks(a, b, c, d) -> np.ndarray:
    return frozen(np.block([[a, b], [c, d]]))


def _check_index(i: int, lo: int, hi: int, name: str) -> int:
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not lo <= i <= hi:
        raise IndexError(f"{name} index must be an integer in [{lo}, {hi}], got {i!r}")
    return int(i)


def identity(n: int = 4) -> np.ndarray:
    return frozen(np.eye(n))


def pauli(i: int) -> np.ndarray:
    """Pauli matrix ``sigma_i`` for ``i`` in 1..3."""
    return _PAULI[_check_index(i, 1, 3, "Pauli") - 1]


def alpha(i: int) -> np.ndarray:
    s = pauli(i)
    return _blocks(_Z2, s, s, _Z2)


def beta_s() -> np.ndarray:
    """The anti-Hermitian mass matrix, equal to ``beta @ gamma5``."""
    return _blocks(_Z2, _I2, -_I2, _Z2)


def beta() -> np.ndarray:
    return _blocks(_I2, _Z2, _Z2, -_I2)


def gamma5() -> np.ndarray:
    return _blocks(_Z2, _I2, _I2, _Z2)


def gamma(mu: int) -> np.ndarray:
    mu = _check_index(mu, 0, 3, "gamma")
    if mu == 0:
        return beta()
    s = pauli(mu)
    return _blocks(_Z2, s, -s, _Z2)


def anticommutator(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    return frozen(a @ b + b @ a)


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    return frozen(a @ b - b @ a)


def dagger(a) -> np.ndarray:
    return frozen(np.conj(np.asarray(a)).T)


def exactly_equal(a, b) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and bool(np.all(a == b))


def max_residual(a, b) -> float:
    """Entrywise max-norm of ``a - b``."""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def allclose(a, b, atol: float = 1e-12) -> bool:
    """Absolute entrywise comparison (no relative term)."""
    return np.shape(a) == np.shape(b) and max_residual(a, b) <= atol


def _vector3(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        p = np.array([0.0, 0.0, float(p)])
    if p.shape != (3,):
        raise ValueError(f"momentum must be a scalar (z-component) or a 3-vector, got shape {p.shape}")
    return p


def sigma_dot(p) -> np.ndarray:
    """``sigma . p`` as a 2x2 matrix; a scalar ``p`` is taken along z."""
    p = _vector3(p)
    return frozen(sum(p[i] * _PAULI[i] for i in range(3)))


def alpha_dot(p) -> np.ndarray:
    p = _vector3(p)
    return frozen(sum(p[i] * alpha(i + 1) for i in range(3)))


def hamiltonian(m_s: float, p, kind: "ParticleKind | str" = ParticleKind.ANTINEUTRINO) -> np.ndarray:
    """Momentum-space Hamiltonian ``+-alpha.p + beta_s m_s``.

    ``p`` may be a 3-vector or a scalar z-momentum.  The kinetic sign is set by
    ``kind`` (``+`` for the antineutrino form, ``-`` for the neutrino form).
    """
    if m_s < 0:
        raise ValueError(f"proper mass must be non-negative, got {m_s}")
    kind = ParticleKind.parse(kind)
    return frozen(kind.alpha_sign * alpha_dot(p) + m_s * beta_s())


# Parameter samples for the floating-point identities (mass, momentum 3-vector).
_SAMPLES = (
    (1.0, (0.0, 0.0, 10.0)),
    (1.6, (0.3, -1.2, 16.0)),
    (0.7, (0.1, 0.2, 0.3)),
    (0.0, (2.0, -1.0, 0.5)),
    (2.5, (-3.0, 4.0, 1.25)),
)

_LEVI_CIVITA = {(1, 2, 3): 1, (2, 3, 1): 1, (3, 1, 2): 1, (3, 2, 1): -1, (1, 3, 2): -1, (2, 1, 3): -1}


def _power_traces(h) -> np.ndarray:
    """Scaled ``tr(H^k)``, k = 1..4: equal iff the spectra agree as multisets."""
    h = np.asarray(h) / max(1.0, float(np.max(np.abs(h))))
    out, power = [], np.eye(4, dtype=complex)
    for _ in range(4):
        power = power @ h
        out.append(np.trace(power))
    return np.array(out)


def verify_identities(samples=_SAMPLES, atol: float = 1e-12) -> list[dict]:
    """Evaluate every algebraic relation of the representation.

    Returns one record per identity with keys ``name``, ``exact`` (integer
    matrices, compared with ``==``), ``residual`` (max entrywise deviation),
    ``tolerance`` and ``passed``.
    """
    rows: list[dict] = []

    def exact(name, lhs, rhs):
        rows.append(dict(name=name, exact=True, residual=max_residual(lhs, rhs),
                         tolerance=0.0, passed=exactly_equal(lhs, rhs)))

    def approx(name, lhs, rhs):
        res = max_residual(lhs, rhs)
        rows.append(dict(name=name, exact=False, residual=res, tolerance=atol, passed=res <= atol))

    eye2, eye4, zero4 = identity(2), identity(4), np.zeros((4, 4), dtype=complex)
    for i in range(1, 4):
        for j in range(1, 4):
            k = 6 - i - j
            eps = _LEVI_CIVITA.get((i, j, k), 0) if i != j else 0
            rhs = (1.0 if i == j else 0.0) * eye2 + (1j * eps * pauli(k) if eps else 0)
            exact(f"pauli_product[{i}{j}]", pauli(i) @ pauli(j), rhs)
    for i in range(1, 4):
        exact(f"pauli_hermitian[{i}]", dagger(pauli(i)), pauli(i))
    for i in range(1, 4):
        for j in range(1, 4):
            exact(f"alpha_anticommutator[{i}{j}]", anticommutator(alpha(i), alpha(j)),
                  2.0 * (i == j) * eye4)
    for i in range(1, 4):
        exact(f"alpha_beta_s_anticommutator[{i}]", anticommutator(alpha(i), beta_s()), zero4)
        exact(f"alpha_hermitian[{i}]", dagger(alpha(i)), alpha(i))
    exact("beta_s_squared", beta_s() @ beta_s(), -eye4)
    exact("beta_s_antihermitian", dagger(beta_s()), -beta_s())
    exact("beta_s_eq_beta_gamma5", beta_s(), beta() @ gamma5())
    exact("gamma5_squared", gamma5() @ gamma5(), eye4)
    exact("gamma0_eq_beta", gamma(0), beta())
    metric = np.diag([1.0, -1.0, -1.0, -1.0])
    for mu in range(4):
        for nu in range(4):
            exact(f"gamma_clifford[{mu}{nu}]", anticommutator(gamma(mu), gamma(nu)),
                  2.0 * metric[mu, nu] * eye4)
    for i in range(1, 4):
        exact(f"gamma_i_eq_beta_alpha[{i}]", gamma(i), beta() @ alpha(i))
        exact(f"gamma5_alpha_commute[{i}]", gamma5() @ alpha(i) @ gamma5(), alpha(i))
    exact("gamma5_beta_s_anticommute", gamma5() @ beta_s() @ gamma5(), -beta_s())

    for n, (m, p) in enumerate(samples):
        p = np.asarray(p, dtype=float)
        p2 = float(p @ p)
        for kind in ParticleKind:
            h = hamiltonian(m, p, kind)
            tag = f"{kind.value}#{n}"
            approx(f"hamiltonian_squared[{tag}]", h @ h, (p2 - m * m) * eye4)
            approx(f"pseudo_hermitian[{tag}]", gamma5() @ dagger(h) @ gamma5(), h)
        h = hamiltonian(m, p)
        covariant = sum(p[i] * gamma(i + 1) for i in range(3)) + m * gamma5()
        approx(f"covariant_form[#{n}]", beta() @ h, covariant)
        approx(f"kind_map_spectrum[#{n}]", _power_traces(h),
               _power_traces(hamiltonian(m, p, ParticleKind.NEUTRINO)))
    return rows
