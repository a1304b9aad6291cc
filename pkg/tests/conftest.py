import math

import numpy as np
import pytest

from tachyon_dirac import evolution

M_S = 1.0
K0 = 10.0
SIGMA_K = 0.5


@pytest.fixture(scope="session")
def standard_grid():
    return evolution.GridSpec(4096, 400.0, 0.01, 2000)


@pytest.fixture(scope="session")
def standard_packet(standard_grid):
    return evolution.gaussian_packet(standard_grid, M_S, K0, SIGMA_K)


@pytest.fixture(scope="session")
def standard_run(standard_packet):
    """Rows of the 2000-step transport run, snapshot every 20 steps."""
    rows, final = evolution.simulate(standard_packet, M_S, 2000, 0.01,
                                     policy="project-out", output_every=20)
    return rows, final


@pytest.fixture(scope="session")
def subcritical_mix(standard_grid, standard_packet):
    """90% standard packet + 10% growing subcritical content near |k| = 0.97 m_s."""
    sub = evolution.subcritical_packet(standard_grid, M_S, 0.97, 0.01)
    field = math.sqrt(0.9) * standard_packet.field + math.sqrt(0.1) * sub.field
    return evolution.WavepacketState(standard_grid, field)


def random_bispinors(rng: np.random.Generator, count: int) -> np.ndarray:
    return rng.normal(size=(count, 4)) + 1j * rng.normal(size=(count, 4))


def band_limited_field(grid, rng: np.random.Generator, k_max: float) -> np.ndarray:
    spec = np.zeros((grid.n, 4), dtype=complex)
    band = np.abs(grid.k) <= k_max
    spec[band] = rng.normal(size=(band.sum(), 4)) + 1j * rng.normal(size=(band.sum(), 4))
    field = np.fft.ifft(spec, axis=0)
    return field / np.max(np.abs(field))


# one line per exit criterion, filled by test_acceptance and echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
