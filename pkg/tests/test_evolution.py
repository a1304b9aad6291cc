import math

import numpy as np
import pytest
import scipy.linalg

from conftest import M_S, band_limited_field
from tachyon_dirac import algebra, chirality as ch, evolution as ev, kinematics
from tachyon_dirac.algebra import ParticleKind
from tachyon_dirac.errors import DegenerateCharge, GridMismatch, SubcriticalContent

KINDS = list(ParticleKind)
# supercritical, critical and subcritical momenta for m_s = 1
MOMENTA = [-12.0, -1.0, -0.999, -0.3, 0.0, 0.5, 1.0, 1.0 + 1e-9, 2.0, 31.4]


class TestGridSpec:
    def test_lattice(self):
        g = ev.GridSpec(8, 4.0)
        assert np.allclose(np.sort(g.k), 2 * np.pi * np.arange(-4, 4) / 4.0)
        assert g.x[0] == -2.0 and g.dx == 0.5

    @pytest.mark.parametrize("kwargs", [dict(n=6, length=1.0), dict(n=4, length=1.0), dict(n=12, length=1.0),
                                        dict(n=8, length=0.0), dict(n=8, length=1.0, dt=0.0),
                                        dict(n=8, length=1.0, steps=-1)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ev.GridSpec(**kwargs)


class TestModePropagator:
    @pytest.mark.parametrize("k", MOMENTA)
    @pytest.mark.parametrize("kind", KINDS)
    def test_matches_expm(self, k, kind):
        for dt in (0.01, 0.37, 2.0):
            want = scipy.linalg.expm(-1j * dt * np.asarray(algebra.hamiltonian(M_S, k, kind)))
            got = ev.mode_propagator(M_S, k, dt, kind)
            assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))

    def test_zero_time(self):
        for k in MOMENTA:
            assert algebra.exactly_equal(ev.mode_propagator(M_S, k, 0.0), np.eye(4))

    @pytest.mark.parametrize("k", MOMENTA)
    def test_group_property(self, k):
        u = ev.mode_propagator(M_S, k, 0.3) @ ev.mode_propagator(M_S, k, -0.3)
        assert np.max(np.abs(u - np.eye(4))) < 1e-12

    def test_critical_is_linear(self):
        h = np.asarray(algebra.hamiltonian(M_S, 1.0))
        assert algebra.allclose(ev.mode_propagator(M_S, 1.0, 0.7), np.eye(4) - 1j * 0.7 * h, atol=0)

    @pytest.mark.parametrize("kind", KINDS)
    def test_pseudo_unitary_over_lattice(self, kind):
        g = ev.GridSpec(4096, 400.0)
        assert ev.pseudo_unitarity_defect(M_S, g.k, 0.01, kind) < 1e-12
        assert ev.pseudo_unitarity_defect(M_S, MOMENTA, 0.5, kind) < 1e-12

    def test_not_unitary_for_massive(self):
        u = ev.mode_propagator(M_S, 3.0, 0.5)
        assert np.max(np.abs(u.conj().T @ u - np.eye(4))) > 1e-3

    def test_nonfinite_dt(self):
        with pytest.raises(ValueError):
            ev.mode_propagator(M_S, 1.0, math.inf)


class TestStep:
    @pytest.mark.parametrize("branch", [(1, 1), (-1, 1), (1, -1), (-1, -1)])
    def test_eigenmode_phase_rotation(self, branch):
        g = ev.GridSpec(128, 2 * np.pi * 4)  # k = mode / 4
        s0 = ev.plane_wave_state(g, M_S, 40, *branch)  # k = 10
        E = branch[1] * math.sqrt(99.0)
        s = s0
        for _ in range(5):
            s = ev.step(s, M_S, 0.1)
        assert np.max(np.abs(s.field - np.exp(-1j * E * 0.5) * s0.field)) < 1e-12 * np.max(np.abs(s0.field))

    @pytest.mark.parametrize("mode", [5, 12, 40])
    def test_phase_velocity(self, mode):
        g = ev.GridSpec(128, 2 * np.pi * 4)
        k = mode / 4
        s0 = ev.plane_wave_state(g, M_S, mode)
        s1 = ev.step(s0, M_S, 0.05)
        phase = -np.angle(np.vdot(s0.field, s1.field)) / 0.05
        assert phase / k == pytest.approx(kinematics.energy_from_momentum(M_S, k) / k, rel=1e-10)

    def test_massless_full_period_return(self):
        g = ev.GridSpec(256, 40.0)
        x = g.x
        xi = np.stack([np.exp(-x ** 2 / 2), np.zeros_like(x)], axis=1)
        field = ch.from_chiral(ch.ChiralPair(xi, np.zeros_like(xi)))
        s0 = ev.WavepacketState(g, field)
        s = s0
        for s in ev.trajectory(s0, 0.0, 800, 0.05):
            pass
        assert s.t == pytest.approx(40.0)
        assert np.max(np.abs(s.field - s0.field)) < 1e-10

    def test_massless_sectors_decouple(self):
        g = ev.GridSpec(128, 20.0)
        rng = np.random.default_rng(3)
        xi = band_limited_field(g, rng, 6.0)[:, :2]
        s0 = ev.WavepacketState(g, ch.from_chiral(ch.ChiralPair(xi, np.zeros_like(xi))))
        for kind in KINDS:
            s = s0
            for s in ev.trajectory(s0, 0.0, 50, 0.02, kind):
                pass
            eta = ch.to_chiral(s.field).eta
            assert np.max(np.abs(eta)) < 1e-15

    @pytest.mark.parametrize("kind", KINDS)
    def test_basis_equivalence(self, kind):
        g = ev.GridSpec(128, 30.0)
        f = band_limited_field(g, np.random.default_rng(11), 6.0)
        s = ev.WavepacketState(g, f)
        for s in ev.trajectory(s, 0.8, 60, 0.02, kind):
            pass
        cp = ev.evolve_chiral(ch.to_chiral(f), g, 0.8, 0.02, 60, kind)
        got = ch.to_chiral(s.field)
        assert max(np.max(np.abs(got.xi - cp.xi)), np.max(np.abs(got.eta - cp.eta))) < 1e-10

    def test_transport_direction_flips_with_kind(self):
        g = ev.GridSpec(512, 100.0)
        x = g.x
        xi = np.stack([np.exp(-x ** 2 / 4) * np.exp(2j * x), np.zeros_like(x)], axis=1)
        s0 = ev.WavepacketState(g, ch.from_chiral(ch.ChiralPair(xi, np.zeros_like(xi))))
        shifts = {}
        for kind in KINDS:
            s = s0
            for s in ev.trajectory(s0, 0.0, 100, 0.1, kind):
                pass
            shifts[kind] = ev.observables(s).centroid_norm - ev.observables(s0).centroid_norm
        assert shifts[ParticleKind.ANTINEUTRINO] == pytest.approx(10.0, rel=1e-6)
        assert shifts[ParticleKind.NEUTRINO] == pytest.approx(-10.0, rel=1e-6)

    def test_thread_setting_is_bit_identical(self, monkeypatch, standard_packet):
        ref = ev.step(standard_packet, M_S, 0.01)
        monkeypatch.setenv("TDIRAC_THREADS", "2")
        other = ev.step(standard_packet, M_S, 0.01)
        assert np.array_equal(ref.field, other.field)
        monkeypatch.setenv("TDIRAC_THREADS", "0")
        with pytest.raises(ValueError):
            ev.step(standard_packet, M_S, 0.01)


class TestPolicies:
    def test_project_out_clears_subcritical(self, subcritical_mix):
        assert ev.subcritical_fraction(subcritical_mix, M_S) == pytest.approx(0.1, rel=1e-12)
        s = ev.step(subcritical_mix, M_S, 0.01, policy="project-out")
        assert ev.subcritical_fraction(s, M_S) < 1e-28

    def test_reject(self, subcritical_mix, standard_packet):
        with pytest.raises(SubcriticalContent):
            ev.step(subcritical_mix, M_S, 0.01, policy="reject")
        ev.step(standard_packet, M_S, 0.01, policy="reject")

    def test_parse(self):
        assert ev.SubcriticalPolicy.parse("project_out") is ev.SubcriticalPolicy.PROJECT_OUT
        with pytest.raises(ValueError):
            ev.SubcriticalPolicy.parse("ignore")

    @pytest.mark.parametrize("k", [-0.9, 0.0, 0.5, 0.97])
    @pytest.mark.parametrize("kind", KINDS)
    def test_subcritical_spinor_eigenvector(self, k, kind):
        kappa = math.sqrt(1 - k * k)
        h = np.asarray(algebra.hamiltonian(M_S, k, kind))
        for growing, lam in ((True, 1j * kappa), (False, -1j * kappa)):
            v = ev.subcritical_spinor(M_S, k, kind, growing)
            assert np.allclose(h @ v, lam * v, atol=1e-14)
            # null vectors of the indefinite charge
            assert abs(np.vdot(v, np.asarray(algebra.gamma5()) @ v)) < 1e-15

    def test_growth_is_monotone_and_bounded(self, standard_grid):
        s0 = ev.subcritical_packet(standard_grid, M_S, 0.0, 0.05)
        kappa_max = math.sqrt(1 - np.min(np.abs(standard_grid.k)) ** 2)
        norms, ts = [], []
        for s in ev.trajectory(s0, M_S, 300, 0.01):
            norms.append(ev.observables(s).norm)
            ts.append(s.t)
        norms = np.array(norms)
        assert np.all(np.diff(norms) >= 0)
        assert norms[-1] > 2 * norms[0]
        # norm = sqrt of the density integral grows at most like exp(kappa_max t); factor-2 slack
        rate = math.log(math.sqrt(norms[-1] / norms[0])) / ts[-1]
        assert 0 < rate <= 2 * kappa_max


class TestObservables:
    def test_packet_charge_positive(self, standard_packet):
        obs = ev.observables(standard_packet, M_S)
        assert obs.Q > 0
        assert obs.norm == pytest.approx(1.0, rel=1e-12)
        assert abs(obs.centroid_norm) < 1e-9
        # charge-weighted energy of a positive-energy packet is close to E(k0)
        assert obs.energy_expect.real == pytest.approx(math.sqrt(99), rel=1e-2)
        assert abs(obs.energy_expect.imag) < 1e-10

    def test_cancelling_mixture_is_degenerate(self, standard_grid):
        a = ev.gaussian_packet(standard_grid, M_S, 10.0, 0.5, helicity=1)
        b = ev.gaussian_packet(standard_grid, M_S, 10.0, 0.5, helicity=-1)
        mix = ev.WavepacketState(standard_grid, (a.field + b.field) / math.sqrt(2))
        obs = ev.observables(mix, M_S)
        assert abs(obs.Q) < 1e-12
        with pytest.raises(DegenerateCharge):
            obs.centroid_rho
        assert math.isnan(obs.as_row()["centroid_rho"])
        assert obs.energy_expect is None

    def test_zero_field(self):
        g = ev.GridSpec(16, 1.0)
        obs = ev.observables(ev.WavepacketState(g, np.zeros((16, 4))))
        assert obs.norm == 0 and obs.Q == 0
        with pytest.raises(DegenerateCharge):
            obs.centroid_rho
        with pytest.raises(DegenerateCharge):
            obs.centroid_norm

    def test_charge_constant_over_short_run(self, standard_packet):
        q0 = ev.observables(standard_packet).Q
        for s in ev.trajectory(standard_packet, M_S, 200, 0.01):
            assert abs(ev.observables(s).Q - q0) <= 1e-10 * abs(q0)


class TestContinuity:
    def test_static_eigenmode(self):
        g = ev.GridSpec(128, 2 * np.pi * 4)
        s0 = ev.plane_wave_state(g, M_S, 40)
        for dt in (0.01, 0.5, 3.0):
            assert ev.continuity_residual(s0, ev.step(s0, M_S, dt)) < 1e-10

    def test_zero_field(self):
        g = ev.GridSpec(16, 1.0)
        z = ev.WavepacketState(g, np.zeros((16, 4)))
        assert ev.continuity_residual(z, ev.step(z, M_S, 0.1)) == 0.0

    def test_second_order(self, standard_packet):
        res = [ev.continuity_residual(standard_packet, ev.step(standard_packet, M_S, dt))
               for dt in (0.1, 0.05, 0.025)]
        for a, b in zip(res, res[1:]):
            assert 3.5 <= a / b <= 4.5

    def test_mismatch(self, standard_packet):
        other = ev.WavepacketState(ev.GridSpec(16, 1.0), np.zeros((16, 4)))
        with pytest.raises(GridMismatch):
            ev.continuity_residual(standard_packet, other)
        with pytest.raises(GridMismatch):
            ev.continuity_residual(standard_packet, standard_packet)


class TestInitialData:
    def test_packet_is_positive_energy(self, standard_packet, standard_grid):
        # every populated mode is an eigenvector of H(k) with +|E|
        spec = np.fft.fft(standard_packet.field, axis=0)
        for j in np.argsort(-np.linalg.norm(spec, axis=1))[:20]:
            k = standard_grid.k[j]
            h = np.asarray(algebra.hamiltonian(M_S, k))
            E = kinematics.energy_from_momentum(M_S, k)
            assert np.allclose(h @ spec[j], E * spec[j], atol=1e-10 * np.linalg.norm(spec[j]) * E)

    def test_neutrino_packet(self, standard_grid):
        s = ev.gaussian_packet(standard_grid, M_S, 10.0, 0.5, kind="neutrino")
        spec = np.fft.fft(s.field, axis=0)
        j = int(np.argmax(np.linalg.norm(spec, axis=1)))
        h = np.asarray(algebra.hamiltonian(M_S, standard_grid.k[j], ParticleKind.NEUTRINO))
        E = kinematics.energy_from_momentum(M_S, standard_grid.k[j])
        assert np.allclose(h @ spec[j], E * spec[j], atol=1e-10 * np.linalg.norm(spec[j]) * E)

    def test_invalid(self, standard_grid):
        with pytest.raises(ValueError):
            ev.gaussian_packet(standard_grid, M_S, 0.5, 0.1)
        with pytest.raises(ValueError):
            ev.gaussian_packet(standard_grid, M_S, 10.0, 0.0)
        with pytest.raises(ValueError):
            ev.subcritical_spinor(M_S, 1.5)

    def test_no_wrap(self):
        ev.check_no_wrap(1.0, 10.0, 0.01, 2000, 400.0)
        with pytest.raises(ValueError):
            ev.check_no_wrap(1.0, 10.0, 0.01, 20000, 400.0)


class TestDump:
    def test_round_trip_and_layout(self, tmp_path, standard_packet):
        path = tmp_path / "field.bin"
        ev.write_field_dump(path, standard_packet)
        raw = path.read_bytes()
        assert raw[:5] == b"TDIR1"
        assert int.from_bytes(raw[5:13], "little") == 4096
        assert len(raw) == 13 + 4096 * 8 * 8
        first = np.frombuffer(raw[13:13 + 16], dtype="<f8")
        assert first[0] == standard_packet.field[0, 0].real and first[1] == standard_packet.field[0, 0].imag
        assert np.array_equal(ev.read_field_dump(path), standard_packet.field)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "x.bin"
        p.write_bytes(b"NOPE!" + bytes(8))
        with pytest.raises(ValueError):
            ev.read_field_dump(p)
