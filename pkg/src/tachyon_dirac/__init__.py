"""Numerical toolkit for a tachyonic spin-1/2 wave equation with H = alpha.p + beta_s m_s.

Modules: ``algebra`` (matrix representation), ``kinematics`` (spacelike
dispersion), ``planewave`` (exact bispinors and bilinears), ``chirality``
(Weyl variables and the alpha -> -alpha map), ``evolution`` (spectral
wavepacket propagation) and ``cli``.
"""

__version__ = "0.1.0"

from .algebra import ParticleKind  # noqa: E402
from .evolution import GridSpec, SubcriticalPolicy, WavepacketState  # noqa: E402
from .kinematics import KinematicPoint  # noqa: E402
from .planewave import PlaneWaveSolution  # noqa: E402

__all__ = [
    "__version__",
    "ParticleKind",
    "GridSpec",
    "SubcriticalPolicy",
    "WavepacketState",
    "KinematicPoint",
    "PlaneWaveSolution",
]
