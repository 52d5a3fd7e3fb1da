"""Named runtime checks over every module's invariants.

Each check returns a CheckResult; the CLI `verify` subcommand prints one
PASS/FAIL line per check and exits nonzero if any fails.  All random
inputs derive from one seeded generator, so a run is reproducible from
its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from . import ising
from .geometry import (bures_fidelity, bures_length, evolved_density,
                       fidelity_decay_check, metric_length, path_lengths, qgt)
from .oscillator import (HOConfig, HarmonicOscillator, cd_exact_eigensystem,
                         ho_metric, ion_waveforms)
from .protocols import cubic_ramp, quintic_ramp
from .spectral import (Spectrum, cd_coupling, spectrum,
                       transitionless_certificate)
from .workstats import (ensemble_energy_variance, excess_variance_direct,
                        excess_variance_geometric, identity_check_rowsum,
                        mean_work, model_ensemble, transition_matrix,
                        work_distribution)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_hermitian(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)


def _check_spectrum_contract(rng):
    worst = 0.0
    for _ in range(6):
        h = _random_hermitian(rng, 14)
        spec = spectrum(h)
        v = spec.states
        worst = max(
            worst,
            float(np.abs(v.conj().T @ v - np.eye(14)).max()),
            float(np.linalg.norm(h @ v - v * spec.energies)
                  / max(np.abs(spec.energies).max(), 1.0)),
            0.0 if np.all(np.diff(spec.energies) >= 0) else 1.0,
        )
        pivots = v[np.argmax(np.abs(v), axis=0), np.arange(14)]
        worst = max(worst, float(np.abs(pivots.imag).max()),
                    0.0 if np.all(pivots.real > 0) else 1.0)
    return CheckResult("spectrum-contract", worst <= 1e-10,
                       f"worst residual {worst:.2e}")


def _check_cd_gauge_invariance(rng):
    worst = 0.0
    for _ in range(4):
        h0 = _random_hermitian(rng, 10)
        dh = _random_hermitian(rng, 10)
        spec = spectrum(h0)
        h1_ref = cd_coupling(spec, dh)
        phases = np.exp(2j * np.pi * rng.random(10))
        rephased = Spectrum(spec.energies, spec.states * phases[None, :])
        worst = max(worst, float(np.abs(cd_coupling(rephased, dh) - h1_ref).max()))
        worst = max(worst, float(np.abs(h1_ref - h1_ref.conj().T).max()))
    return CheckResult("cd-gauge-invariance", worst <= 1e-12,
                       f"max deviation {worst:.2e}")


def _check_lz_closed_form(rng):
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sy = np.array([[0.0, -1j], [1j, 0.0]])
    sz = np.diag([1.0, -1.0]).astype(complex)
    worst = 0.0
    for _ in range(6):
        lam = float(rng.uniform(-2.0, 2.0))
        lamdot = float(rng.uniform(-3.0, 3.0))
        spec = spectrum(lam * sz + sx)
        h1 = cd_coupling(spec, lamdot * sz)
        ref = -(lamdot / (2.0 * (1.0 + lam * lam))) * sy
        worst = max(worst, float(np.abs(h1 - ref).max()))
    return CheckResult("two-level-closed-form", worst <= 1e-12,
                       f"max deviation {worst:.2e}")


def _check_h1_endpoints(model):
    scale = float(np.abs(model.h0_at(0.0)).max())
    dev = max(float(np.abs(model.h1_at(0.0)).max()),
              float(np.abs(model.h1_at(model.tau)).max()))
    return CheckResult("auxiliary-switched-off-at-ends", dev <= 1e-12 * scale,
                       f"max endpoint entry {dev:.2e}")


def _check_certificate(model, h1_scale, levels, grid_points=81):
    grid = np.linspace(0.0, model.tau, grid_points)
    cert = transitionless_certificate(model, levels, grid,
                                      h1_scale=h1_scale, tol=3e-7)
    return CheckResult(
        "transitionless-certificate",
        cert.passed,
        f"worst overlap {cert.worst():.9f} (h1 scale {h1_scale:g})")


def _check_bare_control(model, grid_points=81):
    grid = np.linspace(0.0, model.tau, grid_points)
    cert = transitionless_certificate(model, [0], grid, include_cd=False,
                                      tol=3e-7)
    fid = float(cert.final_fidelity[0])
    return CheckResult("bare-drive-control-fails", fid < 0.999,
                       f"bare final fidelity {fid:.6f}")


def _check_mean_identity(rng, dim=100):
    worst = 0.0
    for _ in range(4):
        omega_f = float(rng.uniform(1.5, 3.0))
        tau = float(rng.uniform(0.5, 2.0))
        beta = float(rng.uniform(0.7, 3.0)) if rng.random() < 0.75 else math.inf
        model = HarmonicOscillator(HOConfig(1.0, omega_f, tau, dim=dim))
        ensemble = model_ensemble(model, beta)
        scale = float(np.abs(model.spectrum0_at(0.0).energies).max())
        for t in np.linspace(0.0, tau, 5):
            cd = mean_work(work_distribution(model, ensemble, t, "cd"))
            ad = mean_work(work_distribution(model, ensemble, t, "adiabatic"))
            worst = max(worst, abs(cd - ad) / scale)
    return CheckResult("mean-work-identity", worst <= 1e-8,
                       f"max |<W>_cd - <W>_ad| / ||H0|| = {worst:.2e}")


def _check_endpoint_equivalence(model, ensemble):
    worst = 0.0
    for t in (0.0, model.tau):
        cd = work_distribution(model, ensemble, t, "cd", merge_tol=1e-9)
        ad = work_distribution(model, ensemble, t, "adiabatic", merge_tol=1e-9)
        if cd.support.shape != ad.support.shape:
            return CheckResult("endpoint-equivalence", False,
                               "atom counts differ at the endpoints")
        worst = max(worst,
                    float(np.abs(cd.support - ad.support).max()),
                    float(np.abs(cd.probabilities - ad.probabilities).max()))
    return CheckResult("endpoint-equivalence", worst <= 1e-8,
                       f"max atom deviation {worst:.2e}")


def _check_variance_identity(model, ensemble, grid):
    # 1e-6 relative with a 1e-10 absolute floor: differenced second
    # moments cannot resolve excesses near the rounding floor
    worst = -math.inf
    for t in grid:
        direct = excess_variance_direct(model, ensemble, t)
        geometric = excess_variance_geometric(model, ensemble, t)
        if abs(geometric) > 1e-10:
            worst = max(worst, abs(direct - geometric)
                        - (1e-6 * abs(geometric) + 1e-10))
    return CheckResult("variance-identity", worst <= 0.0,
                       f"max margin above tolerance {worst:.2e}")


def _check_rowsum(model, ensemble, grid):
    scale = float(np.abs(model.spectrum0_at(0.0).energies).max())
    worst = max(identity_check_rowsum(model, ensemble, t) for t in grid)
    return CheckResult("rowsum-identity", worst <= 1e-8 * scale,
                       f"max residual {worst:.2e} (scale {scale:.2g})")


def _check_bound_chain(model, ensemble, grid):
    worst = -math.inf
    ok = True
    for t in grid:
        excess = excess_variance_direct(model, ensemble, t)
        cap = ensemble_energy_variance(model, ensemble, t).variance_cd
        ok = ok and excess >= -1e-10 and excess <= cap + 1e-8 * max(cap, 1.0)
        worst = max(worst, excess - cap)
    return CheckResult("fluctuation-bound-chain", ok,
                       f"max excess minus cap {worst:.2e}")


def _check_length_chain(rng, samples):
    worst = -math.inf
    for _ in range(samples):
        omega_f = float(rng.uniform(1.3, 2.5))
        tau = float(rng.uniform(0.4, 1.5))
        beta = float(rng.uniform(1.0, 4.0)) if rng.random() < 0.8 else math.inf
        kind = rng.choice(["quintic", "log"])
        model = HarmonicOscillator(
            HOConfig(1.0, omega_f, tau, dim=100, ramp_kind=kind))
        ensemble = model_ensemble(model, beta)
        eta, ell = path_lengths(model, ensemble, rel_tol=1e-9)
        bures = bures_length(evolved_density(model, ensemble, 0.0),
                             evolved_density(model, ensemble, tau))
        worst = max(worst, bures - eta, eta - ell)
    return CheckResult("length-chain", worst <= 1e-8,
                       f"max chain violation {worst:.2e}")


def _check_equality_identity(model, ensemble, grid):
    excess = np.array([excess_variance_direct(model, ensemble, t) for t in grid])
    avg = float(simpson(np.sqrt(np.clip(excess, 0.0, None)), x=grid)) / model.tau
    ell = metric_length(model, ensemble)
    residual = abs(model.tau * avg - ell) / ell
    return CheckResult("duration-length-equality", residual <= 1e-6,
                       f"relative residual {residual:.2e}")


def _check_qgt(model, rng):
    worst = 0.0
    for t in np.linspace(0.1 * model.tau, 0.9 * model.tau, 3):
        for n in (0, 2, 5):
            tensor = qgt(model, n, t)
            evals = np.linalg.eigvalsh(tensor.g)
            worst = max(worst, -float(evals.min()))
            expected = ho_metric(model.omega(t), n)
            worst = max(worst, abs(tensor.g[0, 0] - expected))
    return CheckResult("qgt-psd-and-closed-form", worst <= 1e-8,
                       f"max deviation {worst:.2e}")


def _check_fidelity_properties(rng):
    worst = 0.0
    dim = 8
    for _ in range(4):
        a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        b = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        sig = b @ b.conj().T
        sig /= np.trace(sig).real
        f = bures_fidelity(rho, sig)
        worst = max(worst, abs(f - bures_fidelity(sig, rho)))
        worst = max(worst, abs(bures_fidelity(rho, rho) - 1.0))
        q, _ = np.linalg.qr(rng.standard_normal((dim, dim))
                            + 1j * rng.standard_normal((dim, dim)))
        worst = max(worst, abs(bures_fidelity(q @ rho @ q.conj().T,
                                              q @ sig @ q.conj().T) - f))
        psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        phi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        phi /= np.linalg.norm(phi)
        pure = bures_fidelity(np.outer(psi, psi.conj()), np.outer(phi, phi.conj()))
        worst = max(worst, abs(pure - abs(np.vdot(psi, phi)) ** 2))
    return CheckResult("fidelity-properties", worst <= 1e-10,
                       f"max deviation {worst:.2e}")


def _check_reparametrization(beta=1.0, dim=100):
    values = []
    for kind in ("quintic", "log"):
        model = HarmonicOscillator(HOConfig(1.0, 2.2, 0.7, dim=dim,
                                            ramp_kind=kind))
        values.append(metric_length(model, model_ensemble(model, beta)))
    gap = abs(values[0] - values[1])
    return CheckResult("metric-length-reparametrization", gap <= 1e-7,
                       f"|ell_quintic - ell_log| = {gap:.2e}")


def _check_ho_closed_spectrum(dim=120):
    model = HarmonicOscillator(HOConfig(1.0, 3.0, 1.6, dim=dim))
    cap = dim // 3
    worst = 0.0
    for t in np.linspace(0.0, model.tau, 9):
        w, wd = model.omega(t), model.omega_dot(t)
        energies = model.spectrum_cd_at(t).energies
        exact = np.array([cd_exact_eigensystem(w, wd, n)[0]
                          for n in range(cap + 1)])
        worst = max(worst, float(np.abs(energies[: cap + 1] - exact).max()))
    return CheckResult("driven-spectrum-closed-form", worst <= 1e-7,
                       f"max eigenvalue deviation {worst:.2e}")


def _check_parity(model, ensemble):
    worst = 0.0
    for t in np.linspace(0.0, model.tau, 5):
        tm = transition_matrix(model, ensemble, t)
        n_idx = np.arange(tm.probabilities.shape[0])[:, None]
        m_idx = np.arange(tm.probabilities.shape[1])[None, :]
        odd = (n_idx + m_idx) % 2 == 1
        worst = max(worst, float(tm.probabilities[odd].max()))
    return CheckResult("parity-superselection", worst <= 1e-10,
                       f"max parity-violating probability {worst:.2e}")


def _check_ion_roundtrip():
    table = ion_waveforms(HOConfig(1.0, 3.0, 0.8), nu=3.0)
    nu = table.ion.nu
    back = np.sqrt(nu * (nu - 2.0 * table.potential))
    dev = float(np.abs(back - table.omega).max())
    return CheckResult(
        "ion-waveform-roundtrip", dev <= 1e-12,
        f"max reconstruction error {dev:.2e}, "
        f"min validity ratio {table.min_validity():.3g}")


def _check_ising_oracle():
    worst = 0.0
    for n in (4, 8):
        for lam in (0.6, 1.0, 1.4, 2.0):
            e0, psi0 = ising.exact_ground_state(lam, n)
            worst = max(worst, abs(e0 - ising.ground_energy(lam, n)))
        for lam in (1.3, 2.0):
            energies, vectors = np.linalg.eigh(ising.dense_hamiltonian(lam, n))
            field = ising.dense_field_term(n)
            m = vectors[:, :1].conj().T @ field @ vectors
            g_dense = float(np.sum(np.abs(m[0, 1:]) ** 2
                                   / (energies[1:] - energies[0]) ** 2))
            worst = max(worst, abs(g_dense - ising.ground_metric(lam, n)))
        _, v1 = np.linalg.eigh(ising.dense_hamiltonian(1.4, n))
        _, v2 = np.linalg.eigh(ising.dense_hamiltonian(2.2, n))
        worst = max(worst, abs(abs(v1[:, 0] @ v2[:, 0])
                               - ising.ground_state_overlap(1.4, 2.2, n)))
    return CheckResult("ising-free-fermion-vs-exact", worst <= 1e-8,
                       f"max deviation {worst:.2e}")


def _check_ising_critical_identity():
    worst = 0.0
    for n in (4, 64, 1024, 4096):
        ref = n * (n - 1) / 32.0
        worst = max(worst, abs(ising.ground_metric(1.0, n) - ref) / ref)
    return CheckResult("ising-critical-metric-identity", worst <= 1e-10,
                       f"max relative deviation {worst:.2e}")


def _check_ising_protocol_independence():
    n, delta = 64, 1.0
    ref = ising.sweep_cost_integral(n, delta)
    worst = 0.0
    for tau, proto in ((0.7, cubic_ramp([2.0], [0.0], 0.7)),
                       (1.3, quintic_ramp([2.0], [0.0], 1.3))):
        grid = np.linspace(0.0, tau, 2001)
        lam = np.array([proto.value(t)[0] for t in grid])
        lamdot = np.array([proto.derivative(t)[0] for t in grid])
        g = np.array([ising.ground_metric(x, n) for x in lam])
        val = float(simpson(np.sqrt(g) * np.abs(lamdot), x=grid))
        worst = max(worst, abs(val - ref) / ref)
    return CheckResult("ising-protocol-independence", worst <= 1e-6,
                       f"max relative deviation {worst:.2e}")


def _check_ising_trajectory():
    config = ising.IsingConfig(64, 1.0, 1.0)
    grid = np.linspace(0.0, 1.0, 401)
    traj = ising.cd_excess_trajectory(config, grid)
    ends = max(traj.excess_variance[0], traj.excess_variance[-1])
    interior = traj.excess_variance[1:-1]
    peaks = np.flatnonzero((interior[1:-1] > interior[:-2])
                           & (interior[1:-1] > interior[2:]))
    peak_lam = traj.lam[1 + peaks + 1]
    ok = (ends == 0.0 and np.all(traj.excess_variance >= 0.0)
          and len(peaks) == 1 and abs(peak_lam[0] - 1.0) < 0.1)
    return CheckResult(
        "ising-trajectory-shape", bool(ok),
        f"endpoints {ends:g}, peaks at lam={np.round(peak_lam, 3)}")


def _check_fidelity_decay(model):
    decay = fidelity_decay_check(model, 0, 0.45 * model.tau, 1e-3)
    ok = abs(decay.order - 3.0) <= 0.2
    return CheckResult("fidelity-quadratic-decay", ok,
                       f"observed order {decay.order:.3f}")


def run_verification(seed: int = 20260809, *, fock_dim: int = 120,
                     chain_samples: int = 12, h1_scale: float = 1.0,
                     beta: float = 1.0) -> list[CheckResult]:
    """Run every invariant suite; returns one result per named check.

    TruncationError and friends propagate to the caller: an undersized
    basis is a hard failure, not a FAIL line.
    """
    rng = np.random.default_rng(seed)
    model = HarmonicOscillator(HOConfig(1.0, 3.0, 0.8, dim=fock_dim))
    ensemble = model_ensemble(model, beta)
    grid = np.linspace(0.0, model.tau, 81)

    results = [
        _check_spectrum_contract(rng),
        _check_cd_gauge_invariance(rng),
        _check_lz_closed_form(rng),
        _check_h1_endpoints(model),
        _check_certificate(model, h1_scale, np.arange(0, 9)),
        _check_bare_control(model),
        _check_mean_identity(rng),
        _check_endpoint_equivalence(model, ensemble),
        _check_variance_identity(model, ensemble, grid),
        _check_rowsum(model, ensemble, grid),
        _check_bound_chain(model, ensemble, grid),
        _check_length_chain(rng, chain_samples),
        _check_equality_identity(model, ensemble,
                                 np.linspace(0.0, model.tau, 201)),
        _check_qgt(model, rng),
        _check_fidelity_properties(rng),
        _check_fidelity_decay(model),
        _check_reparametrization(),
        _check_ho_closed_spectrum(max(120, min(fock_dim, 160))),
        _check_parity(model, ensemble),
        _check_ion_roundtrip(),
        _check_ising_oracle(),
        _check_ising_critical_identity(),
        _check_ising_protocol_independence(),
        _check_ising_trajectory(),
    ]
    return results
