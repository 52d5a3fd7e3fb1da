import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdwork import (HOConfig, HarmonicOscillator, NotAState,
                    ParametrizedModel, bures_fidelity, bures_length,
                    constant_protocol, eta_length, evolved_density,
                    fidelity_decay_check, ho_metric, log_ramp, metric_length,
                    model_ensemble, path_lengths, qgt, quintic_ramp,
                    speed_limit_report)
from cdwork.ising import IsingConfig, dense_model, ground_metric


def random_density(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


class TestQgt:
    def test_oscillator_closed_form(self, fig1_model):
        tensor = qgt(fig1_model, 0, 0.0)
        assert tensor.g[0, 0] == pytest.approx(0.125, abs=1e-10)
        for t, n in ((0.3, 2), (0.4, 5), (0.6, 1)):
            tensor = qgt(fig1_model, n, t)
            assert tensor.g[0, 0] == pytest.approx(
                ho_metric(fig1_model.omega(t), n), abs=1e-8)

    def test_overlap_decay_oracle(self, fig1_model):
        # independent route: symmetric overlaps kill the odd term, so
        # 1 - |<n(w-h)|n(w+h)>| = g (2h)^2 / 2 + O(h^4); one Richardson
        # stage removes the quartic term
        from cdwork import spectrum
        omega = 2.0

        def estimate(h):
            va = spectrum(fig1_model.h0_matrix(omega - h)).states[:, 0]
            vb = spectrum(fig1_model.h0_matrix(omega + h)).states[:, 0]
            return 2.0 * (1.0 - abs(np.vdot(va, vb))) / (2.0 * h) ** 2

        g1, g2 = estimate(2e-3), estimate(1e-3)
        oracle = (4.0 * g2 - g1) / 3.0
        assert oracle == pytest.approx(ho_metric(omega, 0), abs=1e-9)

    def test_ising_ground_state_value(self):
        model = dense_model(IsingConfig(4, delta=1.0, tau=1.0))
        tensor = qgt(model, 0, 0.0)  # lam(0) = 2
        assert tensor.g[0, 0] == pytest.approx(0.0285467, abs=1e-6)
        assert tensor.g[0, 0] == pytest.approx(ground_metric(2.0, 4),
                                               rel=1e-10)

    def test_two_parameter_family_psd_and_hermitian(self):
        sz = np.diag([1.0, -1.0]).astype(complex)
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        sy = np.array([[0, -1j], [1j, 0]])
        proto = quintic_ramp([0.4, 0.2], [1.0, 1.3], 1.0)
        model = ParametrizedModel(
            proto, lambda lam: lam[0] * sz + lam[1] * sx + 0.5 * sy,
            dh0_of=lambda lam: [sz, sx])
        for t in (0.0, 0.33, 0.8):
            tensor = qgt(model, 0, t)
            assert np.abs(tensor.q - tensor.q.conj().T).max() < 1e-14
            assert np.linalg.eigvalsh(tensor.g).min() >= -1e-12


class TestFidelityDecay:
    def test_static_protocol_zero_residual(self):
        model = HarmonicOscillator(HOConfig(2.0, 2.0, 1.0, dim=60))
        decay = fidelity_decay_check(model, 0, 0.5, 1e-3)
        assert decay.residual < 1e-14

    def test_oscillator_third_order(self, fig1_model):
        decay = fidelity_decay_check(fig1_model, 0, 0.36, 1e-3)
        assert decay.order == pytest.approx(3.0, abs=0.2)

    def test_ising_third_order(self):
        model = dense_model(IsingConfig(8, delta=0.5, tau=1.0))
        decay = fidelity_decay_check(model, 0, 0.3, 1e-3)
        assert decay.order == pytest.approx(3.0, abs=0.2)


class TestMetricLength:
    def test_constant_protocol_zero(self):
        model = HarmonicOscillator(HOConfig(2.0, 2.0, 1.0, dim=60))
        assert metric_length(model, model_ensemble(model, 1.0)) == 0.0

    def test_closed_form_oracle(self, fig1_model, fig1_ensemble):
        n = np.arange(fig1_ensemble.n_levels)
        oracle = math.sqrt(
            float(fig1_ensemble.weights @ (n * n + n + 1.0)) / 8.0) \
            * math.log(3.0)
        ell = metric_length(fig1_model, fig1_ensemble)
        assert ell == pytest.approx(oracle, rel=1e-7)
        assert ell == pytest.approx(0.6548, abs=2e-4)

    def test_reparametrization_invariance(self):
        values = []
        for kind, tau in (("quintic", 0.8), ("log", 1.3)):
            model = HarmonicOscillator(
                HOConfig(1.0, 3.0, tau, dim=120, ramp_kind=kind))
            values.append(metric_length(model, model_ensemble(model, 1.0)))
        assert values[0] == pytest.approx(values[1], abs=1e-7)


class TestBures:
    def test_identical_states(self, rng):
        rho = random_density(rng, 6)
        assert bures_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
        assert bures_length(rho, rho) < 1e-5

    def test_orthogonal_pure_states(self):
        a = np.zeros((3, 3), dtype=complex)
        a[0, 0] = 1.0
        b = np.zeros((3, 3), dtype=complex)
        b[1, 1] = 1.0
        assert bures_fidelity(a, b) == pytest.approx(0.0, abs=1e-14)
        assert bures_length(a, b) == pytest.approx(math.pi / 2, abs=1e-7)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=15)
    def test_properties(self, seed):
        gen = np.random.default_rng(seed)
        rho = random_density(gen, 7)
        sig = random_density(gen, 7)
        f = bures_fidelity(rho, sig)
        assert 0.0 <= f <= 1.0
        assert f == pytest.approx(bures_fidelity(sig, rho), abs=1e-10)
        q, _ = np.linalg.qr(gen.standard_normal((7, 7))
                            + 1j * gen.standard_normal((7, 7)))
        rotated = bures_fidelity(q @ rho @ q.conj().T, q @ sig @ q.conj().T)
        assert rotated == pytest.approx(f, abs=1e-10)

    def test_pure_state_reduction(self, rng):
        psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        psi /= np.linalg.norm(psi)
        phi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        phi /= np.linalg.norm(phi)
        f = bures_fidelity(np.outer(psi, psi.conj()), np.outer(phi, phi.conj()))
        assert f == pytest.approx(abs(np.vdot(psi, phi)) ** 2, abs=1e-12)

    def test_rejects_non_states(self, rng):
        with pytest.raises(NotAState):
            bures_fidelity(2.0 * np.eye(3), np.eye(3) / 3.0)
        with pytest.raises(NotAState):
            bures_fidelity(np.diag([1.5, -0.5, 0.0]).astype(complex),
                           np.eye(3) / 3.0)
        with pytest.raises(NotAState):
            bures_fidelity(np.array([[0.5, 0.5], [0.0, 0.5]]),
                           np.eye(2) / 2.0)

    def test_figure_endpoints(self, fig1_model, fig1_ensemble):
        rho0 = evolved_density(fig1_model, fig1_ensemble, 0.0)
        rho1 = evolved_density(fig1_model, fig1_ensemble, 0.8)
        value = bures_length(rho0, rho1)
        assert value == pytest.approx(0.476, abs=0.005)


class TestEtaLength:
    def test_constant_path_zero(self):
        model = HarmonicOscillator(HOConfig(2.0, 2.0, 1.0, dim=60))
        assert eta_length(model, model_ensemble(model, 1.0)) == 0.0

    def test_bracketed_by_bures_and_metric(self, fig1_model, fig1_ensemble):
        eta, ell = path_lengths(fig1_model, fig1_ensemble)
        rho0 = evolved_density(fig1_model, fig1_ensemble, 0.0)
        rho1 = evolved_density(fig1_model, fig1_ensemble, 0.8)
        bures = bures_length(rho0, rho1)
        assert bures <= eta + 1e-8
        assert eta <= ell + 1e-8

    def test_pure_state_reduces_to_metric_length(self, fig1_model,
                                                 fig1_ground):
        eta, ell = path_lengths(fig1_model, fig1_ground)
        assert eta == pytest.approx(ell, rel=1e-9)


class TestSpeedLimit:
    def test_figure_point_report(self, fig1_model, fig1_ensemble):
        report = speed_limit_report(fig1_model, fig1_ensemble,
                                    grid_points=201)
        assert report.passed
        assert report.ell == pytest.approx(0.6548, abs=2e-4)
        assert report.bures_len == pytest.approx(0.476, abs=0.005)
        assert report.tau >= report.bound_from_excess
        assert report.bound_from_excess >= report.bound_from_energy

    def test_doubling_tau_halves_average_excess(self):
        reports = []
        for tau in (0.8, 1.6):
            model = HarmonicOscillator(HOConfig(1.0, 3.0, tau, dim=120))
            reports.append(speed_limit_report(model, model_ensemble(model, 1.0),
                                              grid_points=201))
        ratio = reports[0].avg_excess_dev / reports[1].avg_excess_dev
        assert ratio == pytest.approx(2.0, rel=1e-6)
        assert reports[0].ell == pytest.approx(reports[1].ell, rel=1e-8)

    def test_zero_temperature_geodesic_equality(self):
        # small-amplitude log ramp: the ground-state path is a geodesic
        # to quadratic accuracy in its arc length
        model = HarmonicOscillator(
            HOConfig(1.0, 1.05, 1.0, dim=60, ramp_kind="log"))
        ensemble = model_ensemble(model, math.inf)
        report = speed_limit_report(model, ensemble, grid_points=201)
        ratio = report.tau * report.avg_excess_dev / report.bures_len
        assert ratio == pytest.approx(1.0, abs=1e-4)
