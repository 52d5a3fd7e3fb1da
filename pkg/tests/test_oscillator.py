import math

import numpy as np
import pytest
from scipy.integrate import quad

from cdwork import (ConfigError, HOConfig, HarmonicOscillator, InvalidDetuning,
                    SupercriticalDrive, ValidityWarning, cd_exact_eigensystem,
                    ho_metric, ion_waveforms, metric_length, model_ensemble,
                    qgt, ramp, variance_work, work_distribution)
from cdwork.oscillator import IonConfig


class TestRamp:
    def test_boundary_conditions(self):
        proto = ramp(1.0, 3.0, 0.8)
        assert proto.value(0.0)[0] == 1.0
        assert proto.value(0.8)[0] == 3.0
        assert proto.derivative(0.0)[0] == 0.0
        assert proto.derivative(0.8)[0] == 0.0

    def test_midpoint_values(self):
        proto = ramp(1.0, 3.0, 0.8)
        assert proto.value(0.4)[0] == pytest.approx(2.0, abs=1e-14)
        assert proto.derivative(0.4)[0] == pytest.approx(4.6875, abs=1e-12)

    def test_flat_ramp(self):
        proto = ramp(2.0, 2.0, 1.0)
        assert all(proto.value(t)[0] == 2.0 for t in np.linspace(0, 1, 5))


class TestConfig:
    def test_rejects_small_basis(self):
        with pytest.raises(ConfigError):
            HOConfig(1.0, 3.0, 0.8, dim=20).validate()

    def test_rejects_nonpositive_parameters(self):
        with pytest.raises(ConfigError):
            HOConfig(-1.0, 3.0, 0.8).validate()
        with pytest.raises(ConfigError):
            HOConfig(1.0, 3.0, 0.8, mass=0.0).validate()

    def test_supercritical_ramp_flagged(self):
        cfg = HOConfig(1.0, 3.0, 0.4)
        with pytest.raises(SupercriticalDrive):
            cfg.validate()
        assert cfg.max_drive_ratio() > 1.0
        # the model itself is still constructible; only the closed-form
        # eigensystem requires the subcritical drive
        HarmonicOscillator(cfg)

    def test_default_reference_frequency(self):
        assert HOConfig(1.0, 3.0, 0.8).omega_ref == pytest.approx(math.sqrt(3))
        assert HOConfig(1.0, 3.0, 0.8,
                        reference_frequency=2.0).omega_ref == 2.0


class TestMatrices:
    def test_ground_state_energy_at_reference(self, fig1_model):
        w_ref = fig1_model.config.omega_ref
        h0 = fig1_model.h0_matrix(w_ref)
        assert h0[0, 0] == pytest.approx(w_ref / 2.0, rel=1e-12)

    def test_h1_vanishes_without_drive(self, fig1_model):
        assert np.abs(fig1_model.h1_matrix(2.0, 0.0)).max() == 0.0

    def test_h1_couples_only_two_apart(self, fig1_model):
        h1 = fig1_model.h1_matrix(2.0, 1.3)
        mask = np.ones_like(h1, dtype=bool)
        d = fig1_model.dim
        idx = np.arange(d - 2)
        mask[idx, idx + 2] = mask[idx + 2, idx] = False
        assert np.abs(h1[mask]).max() == 0.0

    def test_h1_element_magnitude(self, fig1_model):
        # |<2|H1|0>| = omegadot sqrt(2) / (4 omega) at the reference
        # frequency (ladder algebra: qp+pq = i(raise^2 - lower^2))
        w_ref = fig1_model.config.omega_ref
        wd = 1.7
        h1 = fig1_model.h1_matrix(w_ref, wd)
        assert abs(h1[2, 0]) == pytest.approx(wd * math.sqrt(2) / (4 * w_ref),
                                              rel=1e-12)
        assert h1[2, 0].real == 0.0  # purely imaginary coupling

    def test_hermitian(self, fig1_model):
        for t in (0.1, 0.37, 0.62):
            h = fig1_model.h_cd_at(t)
            assert np.abs(h - h.conj().T).max() < 1e-14


class TestClosedFormEigensystem:
    def test_static_limit(self):
        energy, _ = cd_exact_eigensystem(2.0, 0.0, 3)
        assert energy == pytest.approx(7.0, rel=1e-14)

    def test_reference_value(self):
        energy, _ = cd_exact_eigensystem(2.0, 4.0, 0)
        assert energy == pytest.approx(math.sqrt(0.75), rel=1e-12)
        assert energy == pytest.approx(0.8660, abs=5e-5)

    def test_supercritical_raises(self):
        with pytest.raises(SupercriticalDrive):
            cd_exact_eigensystem(1.0, 2.0, 0)

    def test_fock_engine_matches_across_ramp(self):
        model = HarmonicOscillator(HOConfig(1.0, 3.0, 1.6, dim=120))
        cap = model.dim // 3
        for t in np.linspace(0.0, 1.6, 9):
            w, wd = model.omega(t), model.omega_dot(t)
            energies = model.spectrum_cd_at(t).energies
            exact = np.array([cd_exact_eigensystem(w, wd, n)[0]
                              for n in range(cap + 1)])
            assert np.abs(energies[: cap + 1] - exact).max() < 1e-7

    def test_wavefunction_normalized_and_chirped(self):
        energy, psi = cd_exact_eigensystem(2.0, 4.0, 2)
        norm, _ = quad(lambda x: abs(psi(x)) ** 2, -8.0, 8.0, limit=200)
        assert norm == pytest.approx(1.0, rel=1e-8)
        value = psi(0.7)
        assert abs(value.imag) > 1e-3  # chirp phase present

    def test_wavefunction_matches_fock_engine(self):
        # reconstruct the position wavefunction from the Fock-space
        # eigenvector via reference-basis Hermite functions
        from numpy.polynomial.hermite import hermval
        model = HarmonicOscillator(HOConfig(1.0, 3.0, 1.6, dim=120))
        t = 0.8
        w, wd = model.omega(t), model.omega_dot(t)
        level = 1
        _, psi = cd_exact_eigensystem(w, wd, level)
        vec = model.spectrum_cd_at(t).states[:, level]
        w_ref = model.config.omega_ref

        def basis_fn(n, x):
            coeff = np.zeros(n + 1)
            coeff[n] = 1.0
            norm = (w_ref / math.pi) ** 0.25 / math.sqrt(
                2.0**n * math.factorial(n))
            return norm * hermval(math.sqrt(w_ref) * x, coeff) \
                * math.exp(-0.5 * w_ref * x * x)

        xs = np.array([-1.1, -0.4, 0.3, 0.9])
        rebuilt = sum(vec[n] * np.array([basis_fn(n, x) for x in xs])
                      for n in range(60))
        target = np.array([psi(x) for x in xs])
        phase = target[2] / rebuilt[2]
        assert np.abs(rebuilt * phase - target).max() < 1e-6


class TestHoMetric:
    def test_reference_values(self):
        assert ho_metric(1.0, 0) == pytest.approx(0.125, rel=1e-14)
        assert ho_metric(2.0, 1) == pytest.approx(3.0 / 32.0, rel=1e-14)

    def test_frequency_scaling(self):
        assert ho_metric(2.0, 4) == pytest.approx(ho_metric(1.0, 4) / 4.0,
                                                  rel=1e-14)

    def test_matches_perturbative_route(self, fig1_model):
        for t, n in ((0.2, 0), (0.4, 3), (0.7, 7)):
            g = qgt(fig1_model, n, t).g[0, 0]
            assert g == pytest.approx(ho_metric(fig1_model.omega(t), n),
                                      abs=1e-8)


class TestTruncationConvergence:
    def test_figure_point_stable_under_doubling(self):
        values = {}
        for dim in (120, 240):
            model = HarmonicOscillator(HOConfig(1.0, 3.0, 0.8, dim=dim))
            ensemble = model_ensemble(model, 1.0)
            dist = work_distribution(model, ensemble, 0.8, "cd")
            values[dim] = (
                float(dist.probabilities @ dist.support),
                variance_work(dist),
                metric_length(model, ensemble),
            )
        for a, b in zip(values[120], values[240]):
            assert abs(a - b) < 1e-7


class TestIonWaveforms:
    def test_flat_ramp_needs_no_drive(self):
        table = ion_waveforms(HOConfig(3.0, 3.0, 1.0), nu=3.0)
        assert np.abs(table.potential).max() == 0.0
        assert np.abs(table.omega_eff1).max() == 0.0

    def test_initial_amplitude(self):
        table = ion_waveforms(HOConfig(1.0, 3.0, 0.8), nu=3.0)
        assert table.potential[0] == pytest.approx(4.0 / 3.0, rel=1e-12)
        assert table.potential[-1] == pytest.approx(0.0, abs=1e-12)

    def test_phase_at_midramp(self):
        table = ion_waveforms(HOConfig(1.0, 3.0, 0.8), nu=3.0,
                              grid_points=401)
        i = 200
        w, wd = table.omega[i], table.omega_dot[i]
        expected = math.atan2(wd / (2.0 * w), -table.potential[i])
        assert table.phi3[i] == pytest.approx(expected, rel=1e-12)
        assert table.omega_eff1[i] == pytest.approx(
            -table.potential[i] + 0.5j * wd / w, rel=1e-12)

    def test_round_trip(self):
        table = ion_waveforms(HOConfig(1.0, 3.0, 0.8), nu=3.0)
        back = np.sqrt(3.0 * (3.0 - 2.0 * table.potential))
        assert np.abs(back - table.omega).max() < 1e-12

    def test_effective_mass(self):
        table = ion_waveforms(HOConfig(1.0, 3.0, 0.8), nu=3.0,
                              ion=IonConfig(nu=3.0, trap_frequency=6.0))
        assert table.ion.effective_mass == pytest.approx(2.0, rel=1e-14)

    def test_unreachable_ramp_rejected(self):
        with pytest.raises(InvalidDetuning):
            ion_waveforms(HOConfig(1.0, 3.0, 0.8), nu=2.0)

    def test_marginal_validity_warns(self):
        weak = IonConfig(nu=3.0, delta_spin=20.0)
        with pytest.warns(ValidityWarning):
            ion_waveforms(HOConfig(1.0, 3.0, 0.8), nu=3.0, ion=weak)
