"""Quantum geometric tensor, path lengths, Uhlmann fidelity and the
speed-limit inequality chain.

The per-level geometric tensor is computed from the gauge-invariant
second-order perturbative sum

    Q_mu_nu(n) = sum_{k != n} <n|dH0/dlam_mu|k><k|dH0/dlam_nu|n>
                               / (eps_k - eps_n)^2,

whose real part g is the metric that controls both the quadratic decay
of eigenstate fidelity and the excess of work fluctuations under
counterdiabatic driving.  Three path functionals are provided:

  * metric_length: ell = integral sqrt(sum_n p_n g^(n) lamdot lamdot) dt,
  * eta_length: the mixed-state Riemannian length whose metric carries
    the (p_n - p_k)^2/(p_n + p_k) weights (populations are constant
    under counterdiabatic driving, so the classical term drops),
  * bures_length: arccos sqrt(F) between the endpoint density matrices.

They obey bures <= eta <= ell, and tau times the time-averaged excess
work-fluctuation amplitude equals ell exactly (hbar = 1 units).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import DegeneracyError, NotAState
from .quadrature import adaptive_simpson, adaptive_simpson_multi


@dataclass(frozen=True)
class GeometricTensor:
    """Per-level tensor Q (complex Hermitian in the parameter indices)
    and its real part g (symmetric PSD)."""

    q: np.ndarray
    g: np.ndarray
    level: int


def _coupling_matrices(model, t):
    spec = model.spectrum0_at(t)
    parts = model.dh0_dlambda_at(t)
    return spec, [spec.states.conj().T @ p @ spec.states for p in parts]


def qgt_levels(model, levels, t: float, *, degeneracy_tol: float = 1e-9) -> np.ndarray:
    """Geometric tensors for several levels at once, shape (L, P, P).

    Shares the spectrum and coupling matrices across levels.
    """
    levels = np.atleast_1d(np.asarray(levels, dtype=int))
    spec, ms = _coupling_matrices(model, t)
    e = spec.energies
    scale = max(abs(e[0]), abs(e[-1]), 1e-300)
    n_par = len(ms)
    out = np.empty((len(levels), n_par, n_par), dtype=complex)
    for i, n in enumerate(levels):
        gaps = e - e[n]
        gaps[n] = 1.0
        if np.any((np.abs(gaps) < degeneracy_tol * scale)
                  & (np.arange(len(e)) != n)):
            raise DegeneracyError(f"level {n} is near-degenerate at t={t:g}")
        inv2 = 1.0 / gaps**2
        inv2[n] = 0.0
        for mu in range(n_par):
            for nu in range(mu, n_par):
                val = np.sum(ms[mu][n, :] * ms[nu][:, n] * inv2)
                out[i, mu, nu] = val
                out[i, nu, mu] = np.conj(val)
    return out


def qgt(model, level: int, t: float, **kwargs) -> GeometricTensor:
    q = qgt_levels(model, [level], t, **kwargs)[0]
    g = 0.5 * (q.real + q.real.T)
    return GeometricTensor(q, g, int(level))


@dataclass(frozen=True)
class FidelityDecay:
    """Richardson check of the quadratic eigenstate-fidelity decay."""

    residual: float
    residual_half: float
    order: float


def fidelity_decay_check(model, level: int, t: float, dt: float) -> FidelityDecay:
    """Verify 1 - |<n(t)|n(t+dt)>| = g lamdot lamdot dt^2 / 2 + O(dt^3).

    Returns the residual at dt and dt/2 and the observed convergence
    order log2(residual / residual_half), which should approach 3.
    """
    g = qgt(model, level, t).g
    lamdot = model.protocol.derivative(t)
    rate = float(lamdot @ g @ lamdot)
    v0 = model.spectrum0_at(t).states[:, level]

    def residual(h):
        v1 = model.spectrum0_at(t + h).states[:, level]
        decay = 1.0 - abs(np.vdot(v0, v1))
        return abs(decay - 0.5 * rate * h * h)

    r1, r2 = residual(dt), residual(dt / 2.0)
    order = np.log2(r1 / r2) if r2 > 0 else np.inf
    return FidelityDecay(r1, r2, float(order))


def _ensemble_speed_integrands(model, ensemble):
    """Integrands sqrt(eta lamdot lamdot) and sqrt(sum p g lamdot lamdot)."""
    weights = ensemble.weights

    def both(t):
        lamdot = model.protocol.derivative(t)
        spec, ms = _coupling_matrices(model, t)
        e = spec.energies
        dim = e.shape[0]
        m_dot = np.zeros((dim, dim), dtype=complex)
        for mu, m in enumerate(ms):
            if lamdot[mu] != 0.0:
                m_dot += lamdot[mu] * m
        gaps = e[None, :] - e[:, None]
        np.fill_diagonal(gaps, 1.0)
        scale = max(abs(e[0]), abs(e[-1]), 1e-300)
        num = np.abs(m_dot) ** 2
        # degenerate pairs contribute nothing unless the drive couples a
        # populated one, which the models here exclude
        safe = np.abs(gaps) > 1e-12 * scale
        a = np.divide(num, gaps**2, out=np.zeros_like(num), where=safe)
        np.fill_diagonal(a, 0.0)
        p = np.zeros(dim)
        p[: weights.shape[0]] = weights
        populated = p > 0
        if np.any(~safe & (num > 1e-20 * max(num.max(), 1e-300))
                  & (populated[:, None] | populated[None, :])):
            raise DegeneracyError(
                f"drive couples a degenerate populated pair at t={t:g}")
        g_speed = float(p @ a.sum(axis=1))
        pn, pk = p[:, None], p[None, :]
        den = pn + pk
        wmat = np.divide((pn - pk) ** 2, den, out=np.zeros_like(den),
                         where=den > 0)
        eta_speed = 0.5 * float((wmat * a).sum())
        return np.array([np.sqrt(max(eta_speed, 0.0)),
                         np.sqrt(max(g_speed, 0.0))])

    return both


def metric_length(model, ensemble, *, rel_tol: float = 1e-8,
                  max_nodes=2**15) -> float:
    """Thermal-ensemble metric length ell of the model's protocol."""
    both = _ensemble_speed_integrands(model, ensemble)
    out = adaptive_simpson_multi(both, 0.0, model.tau, rel_tol=rel_tol,
                                 max_nodes=max_nodes)
    return float(out[1])


def eta_length(model, ensemble, *, rel_tol: float = 1e-8,
               max_nodes=2**15) -> float:
    """Riemannian length of the evolved density matrix's path in the
    mixed-state fidelity metric (constant populations)."""
    both = _ensemble_speed_integrands(model, ensemble)
    out = adaptive_simpson_multi(both, 0.0, model.tau, rel_tol=rel_tol,
                                 max_nodes=max_nodes)
    return float(out[0])


def path_lengths(model, ensemble, *, rel_tol: float = 1e-8,
                 max_nodes=2**15) -> tuple[float, float]:
    """(eta_length, metric_length) from one shared quadrature pass."""
    both = _ensemble_speed_integrands(model, ensemble)
    out = adaptive_simpson_multi(both, 0.0, model.tau, rel_tol=rel_tol,
                                 max_nodes=max_nodes)
    return float(out[0]), float(out[1])


# -- mixed-state fidelity ------------------------------------------------

def _check_state(rho: np.ndarray, atol: float) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotAState("density matrix must be square")
    if np.linalg.norm(rho - rho.conj().T) > atol * max(1.0, np.linalg.norm(rho)):
        raise NotAState("density matrix must be Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise NotAState(f"trace {tr!r} deviates from one")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -atol:
        raise NotAState(f"negative eigenvalue {evals.min():.3g}")
    return rho


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    e, v = np.linalg.eigh(rho)
    return (v * np.sqrt(np.clip(e, 0.0, None))) @ v.conj().T


def bures_fidelity(rho: np.ndarray, sigma: np.ndarray, *,
                   atol: float = 1e-10) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Evaluated as the squared trace norm of sqrt(rho) sqrt(sigma), which
    is the same quantity but symmetric in the arguments by construction
    and well conditioned when either state is near singular.
    """
    rho = _check_state(rho, atol)
    sigma = _check_state(sigma, atol)
    singulars = np.linalg.svd(_psd_sqrt(rho) @ _psd_sqrt(sigma),
                              compute_uv=False)
    return min(float(singulars.sum() ** 2), 1.0)


def bures_length(rho: np.ndarray, sigma: np.ndarray, *,
                 atol: float = 1e-10) -> float:
    """arccos sqrt(F): the Riemannian distance induced by fidelity."""
    return float(np.arccos(np.sqrt(bures_fidelity(rho, sigma, atol=atol))))


def evolved_density(model, ensemble, t: float) -> np.ndarray:
    """Density matrix with the initial populations carried onto the
    instantaneous eigenstates at time t (what counterdiabatic driving
    produces)."""
    states = model.spectrum0_at(t).states[:, : ensemble.weights.shape[0]]
    return (states * ensemble.weights) @ states.conj().T


# -- speed-limit report ----------------------------------------------------

@dataclass(frozen=True)
class SpeedLimitReport:
    """All pieces of the duration bound chain for one run.

    equality_residual is |tau <dDW> - ell| / ell; the ordering flags
    check tau >= bures/<dDW> >= bures/<dE_cd>, and chain_ok checks
    bures <= eta <= ell.
    """

    tau: float
    ell: float
    eta_len: float
    bures_len: float
    avg_excess_dev: float
    avg_energy_dev: float
    bound_from_excess: float
    bound_from_energy: float
    equality_residual: float
    chain_ok: bool
    ordering_ok: bool
    equality_ok: bool

    @property
    def passed(self) -> bool:
        return self.chain_ok and self.ordering_ok and self.equality_ok


def speed_limit_report(model, ensemble, *, grid_points: int = 401,
                       rel_tol: float = 1e-8, equality_tol: float = 1e-6,
                       chain_tol: float = 1e-8) -> SpeedLimitReport:
    """Assemble the full bound chain for the model's protocol.

    The time averages come from the two-point-measurement route on a
    uniform grid (composite Simpson), so the equality check against the
    geometric length is a genuine cross-validation of two independent
    computations.
    """
    from .workstats import ensemble_energy_variance, excess_variance_direct

    tau = model.tau
    grid = np.linspace(0.0, tau, grid_points)
    excess = np.array([excess_variance_direct(model, ensemble, t) for t in grid])
    evar = np.array([ensemble_energy_variance(model, ensemble, t).variance_cd
                     for t in grid])
    avg_excess = float(simpson(np.sqrt(np.clip(excess, 0.0, None)), x=grid)) / tau
    avg_energy = float(simpson(np.sqrt(np.clip(evar, 0.0, None)), x=grid)) / tau

    eta, ell = path_lengths(model, ensemble, rel_tol=rel_tol)
    rho0 = evolved_density(model, ensemble, 0.0)
    rho1 = evolved_density(model, ensemble, tau)
    bures = bures_length(rho0, rho1)

    bound_excess = bures / avg_excess if avg_excess > 0 else 0.0
    bound_energy = bures / avg_energy if avg_energy > 0 else 0.0
    residual = abs(tau * avg_excess - ell) / ell if ell > 0 else 0.0
    chain_ok = (bures <= eta + chain_tol * max(eta, 1.0)
                and eta <= ell + chain_tol * max(ell, 1.0))
    ordering_ok = (tau >= bound_excess * (1.0 - 1e-12)
                   and bound_excess >= bound_energy * (1.0 - 1e-12))
    equality_ok = residual <= equality_tol
    return SpeedLimitReport(tau, ell, eta, bures, avg_excess, avg_energy,
                            bound_excess, bound_energy, residual,
                            chain_ok, ordering_ok, equality_ok)
